//! Far-field pattern and backscatter RCS from the scattered-field trace,
//! field export, CSV output, and the PML-vs-TBC comparison harness.

use crate::adapt::{adapt_solve, AdaptOptions, AdaptiveRun, ConvergenceHistory, SolveMethod};
use crate::assembly::{quadrature, SolutionField};
use crate::dtn::{self, TraceCoefficients};
use crate::estimator::EstimatorReport;
use crate::geom::Pt;
use crate::mesh::Region;
use crate::scenario::{Polarization, Scenario, SPEED_OF_LIGHT};
use crate::specfun;
use crate::{Cplx, Error, Result};
use rayon::prelude::*;
use std::io::Write;

/// Sweep axis of an RCS curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcsAxis {
    AngleDeg,
    FrequencyGhz,
}

impl RcsAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            RcsAxis::AngleDeg => "angle_deg",
            RcsAxis::FrequencyGhz => "frequency_ghz",
        }
    }
}

/// Sampled backscatter RCS in dB.
#[derive(Clone, Debug)]
pub struct RcsCurve {
    pub axis: RcsAxis,
    /// (axis value, rcs in dB), strictly increasing axis values.
    pub samples: Vec<(f64, f64)>,
    pub polarization: Polarization,
    pub method: SolveMethod,
}

/// A sweep specification: strictly increasing grid on one axis.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub axis: RcsAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Invariant("sweep grid must be nonempty".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invariant("sweep grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Applies one sweep point to a base scenario.
    pub fn apply(&self, base: &Scenario, value: f64) -> Scenario {
        let mut s = base.clone();
        match self.axis {
            RcsAxis::AngleDeg => s.theta = value.to_radians(),
            RcsAxis::FrequencyGhz => {
                s.kappa0 = 2.0 * std::f64::consts::PI * value * 1e9 / SPEED_OF_LIGHT;
            }
        }
        s
    }
}

/// Modal trace of the scattered field u_h - u_ref on Gamma_R^+.
pub fn scattered_trace(field: &SolutionField, scenario: &Scenario) -> Result<TraceCoefficients> {
    let n = dtn::default_n_modes(scenario.kappa0, scenario.r_inner);
    dtn::trace_coeffs(
        |p, _| Ok(field.eval(p)? - scenario.reference_field(p).0),
        scenario.polarization,
        scenario.r_inner,
        scenario.n_arc,
        n,
        dtn::default_m_samples(n),
    )
}

/// Far-field pattern from scattered-trace coefficients:
/// P(phi) = sum_n c_n / H_n(kappa0 R) e^{-i n pi/2} {sin, cos}(n phi),
/// the coefficient of sqrt(2/(pi kappa0 r)) e^{i(kappa0 r - pi/4)} in the
/// outgoing expansion of the scattered field.
pub fn far_field_from_trace(trace: &TraceCoefficients, kappa0: f64, phi: f64) -> Result<Cplx> {
    let x = Cplx::new(kappa0 * trace.radius, 0.0);
    let mut acc = Cplx::new(0.0, 0.0);
    for (k, c) in trace.coeffs.iter().enumerate() {
        let n = trace.order(k);
        let h = specfun::hankel1(n as u32, x)?;
        let phase = match n % 4 {
            0 => Cplx::new(1.0, 0.0),
            1 => Cplx::new(0.0, -1.0),
            2 => Cplx::new(-1.0, 0.0),
            _ => Cplx::new(0.0, 1.0),
        };
        let angular = match trace.polarization {
            Polarization::TM =>(n as f64 * phi).sin(),
            Polarization::TE => (n as f64 * phi).cos(),
        };
        acc += c / h.value * phase * angular;
    }
    Ok(acc)
}

/// Far-field pattern of a solved field at observation angle phi.
pub fn far_field(field: &SolutionField, scenario: &Scenario, phi: f64) -> Result<Cplx> {
    let trace = scattered_trace(field, scenario)?;
    far_field_from_trace(&trace, scenario.kappa0, phi)
}

/// Linear backscatter power sigma = (4/kappa0) |P|^2.
pub fn sigma_linear(pattern: Cplx, kappa0: f64) -> f64 {
    4.0 / kappa0 * pattern.norm_sqr()
}

/// 10 log10(sigma / lambda).
pub fn rcs_db(sigma: f64, wavelength: f64) -> f64 {
    10.0 * (sigma / wavelength).log10()
}

/// Backscatter observation angle: back along the incidence direction,
/// phi = pi/2 + theta.
pub fn backscatter_angle(theta: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 + theta
}

/// One backscatter RCS evaluation from a finished adaptive run.
pub fn backscatter_from_run(run: &AdaptiveRun) -> Result<f64> {
    let trace = scattered_trace(&run.field, &run.scenario)?;
    let phi = backscatter_angle(run.scenario.theta);
    let p = far_field_from_trace(&trace, run.scenario.kappa0, phi)?;
    Ok(rcs_db(sigma_linear(p, run.scenario.kappa0), run.scenario.wavelength()))
}

/// Runs the adaptive solver per sweep point and collects the backscatter
/// RCS curve. Points run in parallel across `threads` workers; output
/// order follows the grid.
pub fn backscatter_rcs(
    base: &Scenario,
    sweep: &Sweep,
    options: &AdaptOptions,
    threads: usize,
) -> Result<RcsCurve> {
    sweep.validate()?;
    let solve_point = |value: &f64| -> Result<(f64, f64)> {
        let scenario = sweep.apply(base, *value);
        let run = adapt_solve(&scenario, options)?;
        Ok((*value, backscatter_from_run(&run)?))
    };
    let samples: Result<Vec<(f64, f64)>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
        pool.install(|| sweep.values.par_iter().map(solve_point).collect())
    } else {
        sweep.values.iter().map(solve_point).collect()
    };
    Ok(RcsCurve {
        axis: sweep.axis,
        samples: samples?,
        polarization: base.polarization,
        method: options.method,
    })
}

/// Runs both methods over the sweep; returns (pml, tbc) curves.
pub fn compare_rcs(
    base: &Scenario,
    sweep: &Sweep,
    options: &AdaptOptions,
    threads: usize,
) -> Result<(RcsCurve, RcsCurve)> {
    let mut pml_options = options.clone();
    pml_options.method = SolveMethod::Pml;
    let mut tbc_options = options.clone();
    tbc_options.method = SolveMethod::Tbc;
    let pml = backscatter_rcs(base, sweep, &pml_options, threads)?;
    let tbc = backscatter_rcs(base, sweep, &tbc_options, threads)?;
    Ok((pml, tbc))
}

/// Relative H^1(Omega) error of a solved field against the analytic
/// reference field, integrated over the physical (non-PML) elements.
pub fn h1_error_vs_reference(field: &SolutionField, scenario: &Scenario) -> Result<f64> {
    let (err, norm) = h1_error_parts(field, scenario)?;
    Ok(err / norm)
}

/// Absolute H^1(Omega) error and reference norm.
pub fn h1_error_parts(field: &SolutionField, scenario: &Scenario) -> Result<(f64, f64)> {
    let mesh = &field.mesh;
    let degree = field.degree() as usize;
    let rule = quadrature::triangle_rule(2 * degree + 2)?;
    let mut err_sq = 0.0;
    let mut norm_sq = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.region == Region::Pml {
            continue;
        }
        let [a, b, c] = mesh.triangle_points(t);
        let area = mesh.area(t);
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * area;
            let x = Pt {
                x: a.x + (b.x - a.x) * xi + (c.x - a.x) * eta,
                y: a.y + (b.y - a.y) * xi + (c.y - a.y) * eta,
            };
            let (uh, gh) = field.value_grad_ref(t, xi, eta);
            let (ur, gr) = scenario.reference_field(x);
            err_sq += w
                * ((uh - ur).norm_sqr() + (gh[0] - gr[0]).norm_sqr() + (gh[1] - gr[1]).norm_sqr());
            norm_sq += w * (ur.norm_sqr() + gr[0].norm_sqr() + gr[1].norm_sqr());
        }
    }
    Ok((err_sq.sqrt(), norm_sq.sqrt()))
}

/// L^2(Omega) norm of the difference of two solved fields living on
/// different meshes of the same scenario; integrates over the non-PML
/// elements of the first field's mesh, evaluating the second through its
/// locator. Returns (difference, norm of the second field).
pub fn l2_difference_omega(a: &SolutionField, b: &SolutionField) -> Result<(f64, f64)> {
    let mesh = &a.mesh;
    let degree = a.degree() as usize;
    let rule = quadrature::triangle_rule(2 * degree + 2)?;
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.region == Region::Pml {
            continue;
        }
        let [pa, pb, pc] = mesh.triangle_points(t);
        let area = mesh.area(t);
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * area;
            let x = Pt {
                x: pa.x + (pb.x - pa.x) * xi + (pc.x - pa.x) * eta,
                y: pa.y + (pb.y - pa.y) * xi + (pc.y - pa.y) * eta,
            };
            let ua = a.value_ref(t, xi, eta);
            let ub = b.eval(x)?;
            diff_sq += w * (ua - ub).norm_sqr();
            norm_sq += w * ub.norm_sqr();
        }
    }
    Ok((diff_sq.sqrt(), norm_sq.sqrt()))
}

// ---------------------------------------------------------------------------
// file output
// ---------------------------------------------------------------------------

/// VTK legacy export of a solved field with re(u), im(u), |u| point data
/// and the estimator indicators as cell data when provided.
pub fn export_field<W: Write>(
    field: &SolutionField,
    report: Option<&EstimatorReport>,
    out: &mut W,
) -> Result<()> {
    let mesh = &field.mesh;
    let n_vert = mesh.vertices.len();
    // vertex coefficients come first in the DoF numbering for both degrees
    let re: Vec<f64> = (0..n_vert).map(|v| field.coeffs[v].re).collect();
    let im: Vec<f64> = (0..n_vert).map(|v| field.coeffs[v].im).collect();
    let mag: Vec<f64> = (0..n_vert).map(|v| field.coeffs[v].norm()).collect();
    let point_data: Vec<(&str, &[f64])> =
        vec![("re_u", re.as_slice()), ("im_u", im.as_slice()), ("abs_u", mag.as_slice())];
    let cell_data: Vec<(&str, &[f64])> = match report {
        Some(r) => vec![("eta", r.eta.as_slice())],
        None => Vec::new(),
    };
    mesh.write_vtk(out, &point_data, &cell_data)
}

/// CSV with header `axis,value,rcs_db,method,polarization`.
pub fn write_rcs_csv<W: Write>(curve: &RcsCurve, out: &mut W) -> Result<()> {
    writeln!(out, "axis,value,rcs_db,method,polarization")?;
    for &(value, db) in &curve.samples {
        writeln!(
            out,
            "{},{:.12e},{:.12e},{},{}",
            curve.axis.as_str(),
            value,
            db,
            curve.method.as_str(),
            curve.polarization
        )?;
    }
    Ok(())
}

/// CSV with per-point dB difference of two curves over the same grid.
/// Returns (max, mean) absolute difference.
pub fn write_delta_csv<W: Write>(pml: &RcsCurve, tbc: &RcsCurve, out: &mut W) -> Result<(f64, f64)> {
    assert_eq!(pml.samples.len(), tbc.samples.len());
    writeln!(out, "axis,value,rcs_pml_db,rcs_tbc_db,delta_db")?;
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    for (&(v, a), &(_, b)) in pml.samples.iter().zip(&tbc.samples) {
        let delta = a - b;
        writeln!(out, "{},{:.12e},{:.12e},{:.12e},{:.12e}", pml.axis.as_str(), v, a, b, delta)?;
        max = max.max(delta.abs());
        sum += delta.abs();
    }
    Ok((max, sum / pml.samples.len() as f64))
}

/// History CSV: iteration, dof_count, dof_physical, eps_h, eps_pml,
/// wall_time_s.
pub fn write_history_csv<W: Write>(history: &ConvergenceHistory, out: &mut W) -> Result<()> {
    writeln!(out, "iteration,dof_count,dof_physical,eps_h,eps_pml,wall_time_s")?;
    for r in &history.records {
        writeln!(
            out,
            "{},{},{},{:.12e},{:.12e},{:.6}",
            r.iteration, r.dof_count, r.dof_physical, r.eps_h, r.eps_pml, r.wall_time_s
        )?;
    }
    Ok(())
}

/// Estimator report CSV (per-iteration rows, no timing column).
pub fn write_estimate_csv<W: Write>(history: &ConvergenceHistory, out: &mut W) -> Result<()> {
    writeln!(out, "iteration,dof_count,dof_physical,eps_h,eps_pml")?;
    for r in &history.records {
        writeln!(
            out,
            "{},{},{},{:.12e},{:.12e}",
            r.iteration, r.dof_count, r.dof_physical, r.eps_h, r.eps_pml
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset, Preset};

    #[test]
    fn zero_trace_gives_zero_pattern() {
        let trace = TraceCoefficients {
            polarization: Polarization::TM,
            radius: 0.03125,
            coeffs: vec![Cplx::new(0.0, 0.0); 12],
        };
        let kappa0 = 32.0 * std::f64::consts::PI;
        for phi in [0.3, 1.2, 2.9] {
            assert_eq!(far_field_from_trace(&trace, kappa0, phi).unwrap(), Cplx::new(0.0, 0.0));
        }
    }

    #[test]
    fn single_mode_pattern() {
        // c_1 = 1, TM: P(phi) = e^{-i pi/2} sin(phi) / H_1(kappa0 R)
        let kappa0 = 16.0;
        let radius = 0.4;
        let trace = TraceCoefficients {
            polarization: Polarization::TM,
            radius,
            coeffs: vec![Cplx::new(1.0, 0.0)],
        };
        let h1 = specfun::hankel1(1, Cplx::new(kappa0 * radius, 0.0)).unwrap();
        for phi in [0.5, 1.0, 2.2] {
            let got = far_field_from_trace(&trace, kappa0, phi).unwrap();
            let want = Cplx::new(0.0, -1.0) * phi.sin() / h1.value;
            assert!((got - want).norm() < 1e-13 * want.norm().max(1e-12));
        }
    }

    #[test]
    fn sweep_apply_and_validate() {
        let base = preset(Preset::Example4Sweep);
        let sweep = Sweep { axis: RcsAxis::FrequencyGhz, values: vec![2.0, 10.0, 18.0] };
        sweep.validate().unwrap();
        let hi = sweep.apply(&base, 18.0);
        let expected = 2.0 * std::f64::consts::PI * 18e9 / SPEED_OF_LIGHT;
        assert!((hi.kappa0 - expected).abs() < 1e-9);
        let angle = Sweep { axis: RcsAxis::AngleDeg, values: vec![-85.0, 0.0, 85.0] };
        let turned = angle.apply(&base, 45.0);
        assert!((turned.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let empty = Sweep { axis: RcsAxis::AngleDeg, values: vec![] };
        assert!(empty.validate().is_err());
        let bad = Sweep { axis: RcsAxis::AngleDeg, values: vec![1.0, 1.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_headers_and_shapes() {
        let curve = RcsCurve {
            axis: RcsAxis::AngleDeg,
            samples: vec![(-85.0, 3.25), (0.0, -2.0)],
            polarization: Polarization::TM,
            method: SolveMethod::Pml,
        };
        let mut buf = Vec::new();
        write_rcs_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("axis,value,rcs_db,method,polarization\n"));
        assert_eq!(text.lines().count(), 3);
        let tbc = RcsCurve { method: SolveMethod::Tbc, ..curve.clone() };
        let mut dbuf = Vec::new();
        let (max, mean) = write_delta_csv(&curve, &tbc, &mut dbuf).unwrap();
        assert_eq!((max, mean), (0.0, 0.0));
        assert_eq!(String::from_utf8(dbuf).unwrap().lines().count(), 3);
    }

    #[test]
    fn backscatter_angle_points_back_along_incidence() {
        // incidence direction (sin theta, -cos theta); the reversed ray has
        // polar angle pi/2 + theta
        for theta in [-1.2, -0.3, 0.0, 0.7, 1.4] {
            let phi = backscatter_angle(theta);
            let dir = (phi.cos(), phi.sin());
            let incidence = (theta.sin(), -theta.cos());
            assert!((dir.0 + incidence.0).abs() < 1e-14);
            assert!((dir.1 + incidence.1).abs() < 1e-14);
        }
    }
}
