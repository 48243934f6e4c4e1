//! The adaptive loop: PML parameter selection, solve / estimate / mark /
//! bisect iteration with the maximum marking strategy, and convergence
//! history capture. The transparent-boundary method runs through the same
//! driver for cross validation.

use crate::assembly::{assemble_pml, assemble_tbc, build_dofmap, SolutionField};
use crate::dtn;
use crate::estimator::{global_estimate, EstimatorReport};
use crate::mesh::{initial_mesh, DomainKind, Mesh, RefinementMarks};
use crate::pml::PmlMap;
use crate::scenario::Scenario;
use crate::solver;
use crate::{Error, Result};
use std::sync::Arc;
use std::time::Instant;

/// Which truncation drives the solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Pml,
    Tbc,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Pml => "pml",
            SolveMethod::Tbc => "tbc",
        }
    }
}

/// Options of the adaptive driver.
#[derive(Clone, Debug)]
pub struct AdaptOptions {
    /// Maximum-strategy marking parameter in (0, 1).
    pub tau: f64,
    /// Target eps_h; the loop stops once reached.
    pub tol: Option<f64>,
    /// DoF cap; the loop stops at the first iterate at or above it.
    pub max_dof: Option<usize>,
    /// Required eps_PML level driving the PML parameter selection.
    pub pml_error_cap: f64,
    pub max_iterations: usize,
    /// Initial mesh size; wavelength/8 when unset.
    pub initial_h: Option<f64>,
    pub method: SolveMethod,
    /// DtN series length for TBC solves; default ceil(2 kappa0 R) + 16.
    pub n_modes: Option<usize>,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            tau: 0.5,
            tol: None,
            max_dof: Some(15_000),
            pml_error_cap: 1e-8,
            max_iterations: 60,
            initial_h: None,
            method: SolveMethod::Pml,
            n_modes: None,
        }
    }
}

impl AdaptOptions {
    pub fn with_max_dof(max_dof: usize) -> AdaptOptions {
        AdaptOptions { max_dof: Some(max_dof), ..AdaptOptions::default() }
    }

    pub fn with_tol(tol: f64) -> AdaptOptions {
        AdaptOptions { tol: Some(tol), max_dof: None, ..AdaptOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Invariant("tau in (0, 1)".into()));
        }
        if self.tol.is_none() && self.max_dof.is_none() {
            return Err(Error::Invariant("at least one of tol and max_dof must be set".into()));
        }
        if !(self.pml_error_cap > 0.0) {
            return Err(Error::Invariant("pml_error_cap > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Invariant("max_iterations >= 1".into()));
        }
        Ok(())
    }
}

/// One adaptive iteration snapshot.
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub dof_count: usize,
    pub dof_physical: usize,
    pub eps_h: f64,
    pub eps_pml: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
}

/// Result of an adaptive run.
pub struct AdaptiveRun {
    pub field: SolutionField,
    pub history: ConvergenceHistory,
    pub report: EstimatorReport,
    /// The scenario actually solved (PML parameters may differ after
    /// selection).
    pub scenario: Scenario,
}

/// Chooses sigma0 and rho so the propagation-bound factor alone is below
/// the cap: user values are kept when the factor already meets the cap;
/// otherwise sigma0 is doubled (up to 128) and then the layer widened in
/// steps of R until the factor is below cap * 1e-2 (margin for the
/// unknown trace-norm factor).
pub fn select_pml(scenario: &Scenario, cap: f64) -> Result<Scenario> {
    if !(cap > 0.0) {
        return Err(Error::Invariant("pml_error_cap > 0".into()));
    }
    let factor = |s: &Scenario| PmlMap::from_scenario(s).propagation_factor(s.kappa0);
    if factor(scenario) <= cap {
        return Ok(scenario.clone());
    }
    let margin = 1e-2;
    for extra in 0..=8 {
        let rho = scenario.r_outer + extra as f64 * scenario.r_inner;
        let mut sigma0 = scenario.sigma0;
        loop {
            let mut candidate = scenario.clone();
            candidate.r_outer = rho;
            candidate.sigma0 = sigma0;
            if factor(&candidate) <= cap * margin {
                return Ok(candidate);
            }
            if sigma0 >= 128.0 {
                break;
            }
            sigma0 = (2.0 * sigma0).min(128.0);
        }
    }
    Err(Error::PmlSelection(cap))
}

/// Maximum marking strategy: marks every element whose indicator
/// strictly exceeds tau times the largest indicator.
pub fn mark(report: &EstimatorReport, tau: f64) -> RefinementMarks {
    let max_eta = report.eta.iter().cloned().fold(0.0f64, f64::max);
    let threshold = tau * max_eta;
    RefinementMarks::new(
        report
            .eta
            .iter()
            .enumerate()
            .filter(|&(_, &eta)| eta > threshold)
            .map(|(k, _)| k)
            .collect(),
    )
}

/// Solves the scenario once on the given mesh.
pub fn solve_on_mesh(
    mesh: Arc<Mesh>,
    scenario: &Scenario,
    method: SolveMethod,
    n_modes: Option<usize>,
) -> Result<(SolutionField, EstimatorReport)> {
    let dofmap = Arc::new(build_dofmap(&mesh, scenario));
    let system = match method {
        SolveMethod::Pml => assemble_pml(&mesh, scenario, &dofmap)?,
        SolveMethod::Tbc => {
            let n = n_modes.unwrap_or_else(|| dtn::default_n_modes(scenario.kappa0, scenario.r_inner));
            assemble_tbc(&mesh, scenario, &dofmap, n)?
        }
    };
    let x = solver::solve(&system.matrix, &system.rhs)?;
    let field = SolutionField::from_free(mesh, dofmap, scenario, &x);
    let report = global_estimate(&field, scenario)?;
    Ok((field, report))
}

/// Runs the adaptive loop: select PML parameters, build the initial
/// mesh, then iterate assemble/solve/estimate/mark/bisect until the
/// tolerance or DoF cap is reached.
pub fn adapt_solve(scenario: &Scenario, options: &AdaptOptions) -> Result<AdaptiveRun> {
    options.validate()?;
    scenario.validate()?;
    let scenario = match options.method {
        SolveMethod::Pml => select_pml(scenario, options.pml_error_cap)?,
        SolveMethod::Tbc => scenario.clone(),
    };
    let domain = match options.method {
        SolveMethod::Pml => DomainKind::PmlDomain,
        SolveMethod::Tbc => DomainKind::TbcDomain,
    };
    let h0 = options.initial_h.unwrap_or(scenario.wavelength() / 8.0);
    let mut mesh = Arc::new(initial_mesh(&scenario, h0, domain)?);
    let mut history = ConvergenceHistory::default();

    for iteration in 0..options.max_iterations {
        let started = Instant::now();
        let (field, report) = solve_on_mesh(mesh.clone(), &scenario, options.method, options.n_modes)
            .map_err(|e| Error::AtIteration { iteration, source: Box::new(e) })?;
        history.records.push(IterationRecord {
            iteration,
            dof_count: report.dof_count,
            dof_physical: report.dof_physical,
            eps_h: report.eps_h,
            eps_pml: report.eps_pml,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
        let tol_met = options.tol.map(|t| report.eps_h <= t).unwrap_or(false);
        let dof_met = options.max_dof.map(|d| report.dof_count >= d).unwrap_or(false);
        if tol_met || dof_met || iteration + 1 == options.max_iterations {
            return Ok(AdaptiveRun { field, history, report, scenario });
        }
        let marks = mark(&report, options.tau);
        if marks.is_empty() {
            return Err(Error::Stagnation(iteration));
        }
        mesh = Arc::new(mesh.bisect(&marks));
    }
    unreachable!("loop always returns at the iteration cap")
}
