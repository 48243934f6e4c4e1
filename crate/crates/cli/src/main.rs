//! Command line front end: scenario I/O, adaptive runs, RCS sweeps,
//! PML-vs-TBC comparison, and benchmark presets.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical
//! failure.

use cavity_scatter::adapt::{adapt_solve, AdaptOptions, SolveMethod};
use cavity_scatter::postprocess::{
    backscatter_rcs, compare_rcs, export_field, write_delta_csv, write_estimate_csv,
    write_history_csv, write_rcs_csv, RcsAxis, Sweep,
};
use cavity_scatter::scenario::{load_scenario, preset, scenario_to_json, Preset, Scenario};
use cavity_scatter::Error as CoreError;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "cavity-scatter",
    version,
    about = "Adaptive FEM solver for open cavity scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive solver once and write history, estimate, field
    /// and summary artifacts.
    Run(RunArgs),
    /// Sweep the backscatter RCS over an angle or frequency grid.
    Sweep(SweepArgs),
    /// Run both the PML and TBC methods over a grid and report the
    /// per-point RCS difference.
    Compare(SweepArgs),
    /// List benchmark presets or emit one as a scenario document.
    Preset(PresetArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Benchmark preset name.
    #[arg(long, conflicts_with = "scenario")]
    preset: Option<String>,
    /// Path to a scenario JSON document.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Incidence angle override in radians.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// PML strength override.
    #[arg(long)]
    sigma0: Option<f64>,
    /// Outer radius override as a multiple of R.
    #[arg(long)]
    rho_factor: Option<f64>,
    /// PML profile exponent override.
    #[arg(long)]
    m_pml: Option<u32>,
    /// FEM degree override (1 or 2).
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Args)]
struct SolveArgs {
    /// Maximum marking parameter in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Target estimator value eps_h.
    #[arg(long)]
    tol: Option<f64>,
    /// DoF cap of the adaptive loop.
    #[arg(long)]
    max_dof: Option<usize>,
    /// Truncation method.
    #[arg(long, value_parser = parse_method, default_value = "pml")]
    method: SolveMethod,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Angle grid in degrees, as start:step:stop.
    #[arg(long, conflicts_with = "frequencies", allow_hyphen_values = true)]
    angles: Option<String>,
    /// Frequency grid in GHz, as start:step:stop.
    #[arg(long, allow_hyphen_values = true)]
    frequencies: Option<String>,
}

#[derive(Args)]
struct PresetArgs {
    /// `list` or `emit <name>`.
    action: String,
    name: Option<String>,
    /// Output path for `emit` (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<SolveMethod, String> {
    match s {
        "pml" => Ok(SolveMethod::Pml),
        "tbc" => Ok(SolveMethod::Tbc),
        other => Err(format!("unknown method `{other}`; use pml or tbc")),
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

fn log_level() -> LogLevel {
    match std::env::var("CAVITY_SCATTER_LOG").as_deref() {
        Ok("debug") => LogLevel::Debug,
        Ok("info") => LogLevel::Info,
        Ok("warn") => LogLevel::Warn,
        _ => LogLevel::Error,
    }
}

fn info(msg: &str) {
    if log_level() >= LogLevel::Info {
        eprintln!("[cavity-scatter] {msg}");
    }
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> CliError {
        if e.is_validation() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Numerical(format!("I/O error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args, false),
        Command::Compare(args) => cmd_sweep(args, true),
        Command::Preset(args) => cmd_preset(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn build_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let mut scenario = match (&args.preset, &args.scenario) {
        (Some(name), None) => preset(Preset::from_name(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            load_scenario(&text)?
        }
        _ => {
            return Err(CliError::Usage("give exactly one of --preset and --scenario".into()))
        }
    };
    if let Some(theta) = args.theta {
        scenario.theta = theta;
    }
    if let Some(sigma0) = args.sigma0 {
        scenario.sigma0 = sigma0;
    }
    if let Some(factor) = args.rho_factor {
        scenario.r_outer = factor * scenario.r_inner;
    }
    if let Some(m) = args.m_pml {
        scenario.m_pml = m;
    }
    if let Some(d) = args.degree {
        scenario.fem_degree = d;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn build_options(args: &SolveArgs) -> Result<AdaptOptions, CliError> {
    let mut options = AdaptOptions { tau: args.tau, tol: args.tol, method: args.method, ..AdaptOptions::default() };
    if args.tol.is_some() && args.max_dof.is_none() {
        options.max_dof = None;
    }
    if let Some(d) = args.max_dof {
        options.max_dof = Some(d);
    }
    options.validate()?;
    Ok(options)
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let scenario = build_scenario(&args.scenario)?;
    let options = build_options(&args.solve)?;
    ensure_out(&args.solve.out)?;
    info(&format!(
        "run: {} polarization, kappa0 = {:.4}, method = {}",
        scenario.polarization,
        scenario.kappa0,
        options.method.as_str()
    ));
    let started = Instant::now();
    let run = adapt_solve(&scenario, &options)?;
    let elapsed = started.elapsed().as_secs_f64();

    let dir = &args.solve.out;
    let mut history = fs::File::create(dir.join("history.csv"))?;
    write_history_csv(&run.history, &mut history)?;
    let mut estimate = fs::File::create(dir.join("estimate.csv"))?;
    write_estimate_csv(&run.history, &mut estimate)?;
    let mut field = fs::File::create(dir.join("field.vtk"))?;
    export_field(&run.field, Some(&run.report), &mut field)?;

    let summary = format!(
        "method: {}\niterations: {}\ndof: {}\ndof_physical: {}\neps_h: {:.6e}\neps_pml: {:.6e}\nwall_time_s: {:.3}\n",
        options.method.as_str(),
        run.history.records.len(),
        run.report.dof_count,
        run.report.dof_physical,
        run.report.eps_h,
        run.report.eps_pml,
        elapsed
    );
    fs::write(dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

/// Parses start:step:stop (inclusive within half a step).
fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("grid `{spec}` is not start:step:stop")));
    }
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad number `{s}` in grid `{spec}`")))
    };
    let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(step > 0.0) || stop < start {
        return Err(CliError::Usage(format!("grid `{spec}` must increase")));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn build_sweep(args: &SweepArgs) -> Result<Sweep, CliError> {
    let sweep = match (&args.angles, &args.frequencies) {
        (Some(spec), None) => Sweep { axis: RcsAxis::AngleDeg, values: parse_grid(spec)? },
        (None, Some(spec)) => Sweep { axis: RcsAxis::FrequencyGhz, values: parse_grid(spec)? },
        _ => {
            return Err(CliError::Usage("give exactly one of --angles and --frequencies".into()))
        }
    };
    sweep.validate()?;
    Ok(sweep)
}

fn cmd_sweep(args: SweepArgs, compare: bool) -> Result<(), CliError> {
    let scenario = build_scenario(&args.scenario)?;
    let options = build_options(&args.solve)?;
    let sweep = build_sweep(&args)?;
    ensure_out(&args.solve.out)?;
    let dir = &args.solve.out;
    info(&format!(
        "{} over {} points, threads = {}",
        if compare { "compare" } else { "sweep" },
        sweep.values.len(),
        args.solve.threads
    ));
    if compare {
        let (pml, tbc) = compare_rcs(&scenario, &sweep, &options, args.solve.threads)?;
        let mut f_pml = fs::File::create(dir.join("rcs_pml.csv"))?;
        write_rcs_csv(&pml, &mut f_pml)?;
        let mut f_tbc = fs::File::create(dir.join("rcs_tbc.csv"))?;
        write_rcs_csv(&tbc, &mut f_tbc)?;
        let mut f_delta = fs::File::create(dir.join("delta.csv"))?;
        let (max, mean) = write_delta_csv(&pml, &tbc, &mut f_delta)?;
        println!("points: {}", pml.samples.len());
        println!("delta_db_max: {max:.4}");
        println!("delta_db_mean: {mean:.4}");
    } else {
        let curve = backscatter_rcs(&scenario, &sweep, &options, args.solve.threads)?;
        let mut f = fs::File::create(dir.join("rcs.csv"))?;
        write_rcs_csv(&curve, &mut f)?;
        println!("points: {}", curve.samples.len());
    }
    Ok(())
}

fn cmd_preset(args: PresetArgs) -> Result<(), CliError> {
    match args.action.as_str() {
        "list" => {
            for p in Preset::ALL {
                println!("{}", p.name());
            }
            Ok(())
        }
        "emit" => {
            let name = args
                .name
                .as_deref()
                .ok_or_else(|| CliError::Usage("preset emit needs a name".into()))?;
            let text = scenario_to_json(&preset(Preset::from_name(name)?));
            match &args.out {
                Some(path) => fs::write(path, text)?,
                None => println!("{text}"),
            }
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown preset action `{other}`; use list or emit"))),
    }
}
