use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use simulcap::analysis::{verify_consensus_rate, RateReport};
use simulcap::dynamics::{lyapunov_value, OutcomeClass, SimulationTrace};
use simulcap::experiments::{
    capture_map, extract_boundary, run_sweep, CaptureMap, GridSpec, SweepSpec,
};
use simulcap::{
    build_capture_matrices, certify, simulate, AgentState, CaptureCertificate, Outcome,
    ScenarioError,
};

use crate::config::{parse_scenario, ScenarioConfig};
use crate::error::{CliError, ConfigError};
use crate::output::{
    read_text, read_trace, write_boundary, write_map, write_sweep_summary, write_text, write_trace,
};
use crate::plots::{plot_map_files, plot_overlay_files, plot_trace_file};

#[derive(Debug, Parser)]
#[command(
    name = "simulcap",
    version,
    about = "Simultaneous capture of an intruder by networked defenders"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one engagement; writes trace.csv, result.json, the resolved scenario and a trajectory plot.
    Simulate(RunArgs),
    /// Print the capture certificate as JSON.
    Bound { scenario: PathBuf },
    /// Capture outcome over a lattice of intruder start positions.
    CaptureMap(MapArgs),
    /// One capture map and boundary per setting of the sweep parameter.
    Sweep(MapArgs),
    /// Re-check a stored trace against the Lyapunov rate inequality.
    Verify { scenario: PathBuf, trace: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: available cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Lattice points per axis, overriding the scenario's grid.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub resolution: Option<u32>,
}

#[derive(Debug, Serialize)]
pub struct RunResult {
    pub version: &'static str,
    pub scenario_file: PathBuf,
    /// Resolved scenario with every default written out.
    pub echo: String,
    pub defaults_applied: Vec<String>,
    pub certificate: CaptureCertificate,
    pub outcome: Outcome,
    pub dt: f64,
    pub steps: usize,
    pub rate: RateReport,
    pub trace_file: PathBuf,
    pub resolved_scenario_file: PathBuf,
    pub plot_file: PathBuf,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct MapSummary {
    pub label: String,
    pub capture: usize,
    pub breach: usize,
    pub timeout: usize,
    pub error: usize,
    pub max_capture_time: Option<f64>,
    pub polylines: usize,
    pub map_file: PathBuf,
    pub boundary_file: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct MapResult {
    pub version: &'static str,
    pub scenario_file: PathBuf,
    pub echo: String,
    pub defaults_applied: Vec<String>,
    pub grid: GridSpec,
    pub maps: Vec<MapSummary>,
    /// Settings that could not be run, as `label: reason`.
    pub failed: Vec<String>,
    pub plot_file: PathBuf,
    pub summary_file: Option<PathBuf>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub classification: OutcomeClass,
    pub samples: usize,
    pub report: RateReport,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = read_text(path)?;
    parse_scenario(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

fn scenario_error(path: &Path, e: ScenarioError) -> CliError {
    CliError::Config {
        path: path.to_path_buf(),
        source: ConfigError::Scenario(e),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn with_jobs<T>(jobs: Option<u16>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .map_err(|e| CliError::Runtime(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => run_simulate(&args, out),
        Command::Bound { scenario } => run_bound(&scenario, out),
        Command::CaptureMap(args) => run_capture_map(&args, out),
        Command::Sweep(args) => run_sweep_command(&args, out),
        Command::Verify { scenario, trace } => run_verify(&scenario, &trace, out),
    }
}

fn run_simulate(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = load(&args.scenario)?;
    let s = &cfg.scenario;
    let cm =
        build_capture_matrices(&s.graph).map_err(|e| scenario_error(&args.scenario, e.into()))?;
    let certificate = certify(s, &cm);
    let trace =
        with_jobs(args.jobs, || simulate(s))?.map_err(|e| scenario_error(&args.scenario, e))?;
    let rate = verify_consensus_rate(&trace, &certificate, s.numerics.rate_slack(certificate.c));

    create_dir(&args.out)?;
    let trace_file = args.out.join("trace.csv");
    let resolved_scenario_file = args.out.join("scenario.resolved.toml");
    let plot_file = args.out.join("trajectory.svg");
    let echo = cfg.echo();
    write_trace(&trace_file, &trace.samples)?;
    write_text(&resolved_scenario_file, &echo)?;
    plot_trace_file(&trace_file, s.target, Some(&trace.outcome), &plot_file)?;

    let result = RunResult {
        version: VERSION,
        scenario_file: args.scenario.clone(),
        echo,
        defaults_applied: cfg.defaults_applied.clone(),
        certificate,
        outcome: trace.outcome,
        dt: trace.dt,
        steps: trace.steps,
        rate,
        trace_file,
        resolved_scenario_file,
        plot_file,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json =
        serde_json::to_string_pretty(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(&args.out.join("result.json"), &format!("{json}\n"))?;
    print_json(out, &result)
}

fn run_bound(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(path)?;
    let cm =
        build_capture_matrices(&cfg.scenario.graph).map_err(|e| scenario_error(path, e.into()))?;
    print_json(out, &certify(&cfg.scenario, &cm))
}

fn grid_for(cfg: &ScenarioConfig, resolution: Option<u32>) -> GridSpec {
    let mut grid = cfg.grid;
    if let Some(n) = resolution {
        grid.nx = n as usize;
        grid.ny = n as usize;
    }
    grid
}

fn summarize(
    label: String,
    map: &CaptureMap,
    polylines: usize,
    map_file: PathBuf,
    boundary_file: PathBuf,
) -> MapSummary {
    MapSummary {
        label,
        capture: map.count(OutcomeClass::Capture),
        breach: map.count(OutcomeClass::Breach),
        timeout: map.count(OutcomeClass::Timeout),
        error: map.outcomes.iter().filter(|o| o.class().is_none()).count(),
        max_capture_time: map.max_capture_time(),
        polylines,
        map_file,
        boundary_file,
    }
}

fn run_capture_map(args: &MapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let path = &args.run.scenario;
    let mut cfg = load(path)?;
    let grid = grid_for(&cfg, args.resolution);
    cfg.grid = grid;
    let map = with_jobs(args.run.jobs, || capture_map(&cfg.scenario, &grid))?
        .map_err(|e| scenario_error(path, e))?;
    let boundary = extract_boundary(&map);

    let dir = &args.run.out;
    create_dir(dir)?;
    let map_file = dir.join("map.csv");
    let boundary_file = dir.join("boundary.csv");
    let plot_file = dir.join("heatmap.svg");
    write_map(&map_file, &map)?;
    write_boundary(&boundary_file, &boundary)?;
    plot_map_files(
        &map_file,
        Some(&boundary_file),
        cfg.scenario.target,
        "Capture time over intruder start positions",
        &plot_file,
    )?;
    let result = MapResult {
        version: VERSION,
        scenario_file: path.clone(),
        echo: cfg.echo(),
        defaults_applied: cfg.defaults_applied.clone(),
        grid,
        maps: vec![summarize(
            "base".into(),
            &map,
            boundary.len(),
            map_file,
            boundary_file,
        )],
        failed: Vec::new(),
        plot_file,
        summary_file: None,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json =
        serde_json::to_string_pretty(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(&dir.join("result.json"), &format!("{json}\n"))?;
    print_json(out, &result)
}

fn run_sweep_command(args: &MapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let path = &args.run.scenario;
    let mut cfg = load(path)?;
    let parameter = cfg.sweep.clone().ok_or_else(|| CliError::Config {
        path: path.clone(),
        source: ConfigError::MissingSection("experiment.sweep"),
    })?;
    let grid = grid_for(&cfg, args.resolution);
    cfg.grid = grid;
    let spec = SweepSpec {
        base_scenario: cfg.scenario.clone(),
        parameter,
    };
    let entries = with_jobs(args.run.jobs, || run_sweep(&spec, &grid))?
        .map_err(|e| scenario_error(path, e))?;

    let dir = &args.run.out;
    create_dir(dir)?;
    let mut maps = Vec::new();
    let mut failed = Vec::new();
    let mut overlay = Vec::new();
    for (k, entry) in entries.iter().enumerate() {
        match &entry.result {
            Ok(o) => {
                let map_file = dir.join(format!("setting_{k}_map.csv"));
                let boundary_file = dir.join(format!("setting_{k}_boundary.csv"));
                write_map(&map_file, &o.map)?;
                write_boundary(&boundary_file, &o.boundary)?;
                overlay.push((entry.label.clone(), boundary_file.clone()));
                maps.push(summarize(
                    entry.label.clone(),
                    &o.map,
                    o.boundary.len(),
                    map_file,
                    boundary_file,
                ));
            }
            Err(e) => failed.push(format!("{}: {e}", entry.label)),
        }
    }
    let summary_file = dir.join("sweep.csv");
    write_sweep_summary(&summary_file, &entries)?;
    let plot_file = dir.join("overlay.svg");
    let labelled: Vec<(String, &Path)> = overlay
        .iter()
        .map(|(l, p)| (l.clone(), p.as_path()))
        .collect();
    plot_overlay_files(
        grid.point(0, 0),
        grid.point(grid.nx - 1, grid.ny - 1),
        &labelled,
        cfg.scenario.target,
        "Boundary of the non-capturable region",
        &plot_file,
    )?;
    let result = MapResult {
        version: VERSION,
        scenario_file: path.clone(),
        echo: cfg.echo(),
        defaults_applied: cfg.defaults_applied.clone(),
        grid,
        maps,
        failed,
        plot_file,
        summary_file: Some(summary_file),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let json =
        serde_json::to_string_pretty(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(&dir.join("result.json"), &format!("{json}\n"))?;
    print_json(out, &result)
}

fn run_verify(
    scenario_path: &Path,
    trace_path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = load(scenario_path)?;
    let s = &cfg.scenario;
    let cm =
        build_capture_matrices(&s.graph).map_err(|e| scenario_error(scenario_path, e.into()))?;
    let mut samples = read_trace(trace_path)?;
    let n = s.n_defenders();
    if samples[0].defenders.len() != n {
        return Err(CliError::data(
            trace_path,
            format!(
                "trace has {} defenders, scenario has {n}",
                samples[0].defenders.len()
            ),
        ));
    }
    let start = &samples[0];
    let scale = 1.0
        + s.initial_state
            .defenders
            .iter()
            .map(|p| p.norm())
            .fold(s.initial_state.intruder.norm(), f64::max);
    let mismatch = start
        .defenders
        .iter()
        .zip(&s.initial_state.defenders)
        .map(|(a, b)| a.distance(*b))
        .fold(start.intruder.distance(s.initial_state.intruder), f64::max);
    if start.time != 0.0 || mismatch > 1e-9 * scale {
        return Err(CliError::data(
            trace_path,
            "trace does not start from the scenario's initial state",
        ));
    }
    for sample in &mut samples {
        let state = AgentState::new(sample.defenders.clone(), sample.intruder);
        sample.lyapunov = lyapunov_value(&state, &cm);
    }

    let last = samples.last().expect("read_trace rejects empty traces");
    let num = &s.numerics;
    let outcome = if last
        .defenders
        .iter()
        .all(|p| p.distance(last.intruder) <= num.eps_capture)
    {
        Outcome::SimultaneousCapture(last.time)
    } else if last.intruder.distance(s.target) <= num.eps_target {
        Outcome::Breach(last.time)
    } else {
        Outcome::Timeout(last.time)
    };
    let steps = (last.time / num.dt).round() as usize;
    let certificate = certify(s, &cm);
    let trace = SimulationTrace {
        samples,
        outcome,
        dt: num.dt,
        steps,
    };
    let report = verify_consensus_rate(&trace, &certificate, num.rate_slack(certificate.c));
    let result = VerifyResult {
        classification: outcome.class(),
        samples: trace.samples.len(),
        report,
    };
    print_json(out, &result)?;
    if result.report.applicable && !result.report.pass {
        return Err(CliError::Verification(format!(
            "max violation {} exceeds tolerance {} at t = {}",
            result.report.max_violation,
            result.report.tolerance,
            result.report.time_of_max_violation
        )));
    }
    Ok(())
}
