//! Command-line front end. Exit codes: 0 success, 2 invalid input or
//! configuration, 3 failure while running.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::auxiliary::{acf_pacf, arch_lm_test, fit_auxiliary, transform, AuxFit};
use crate::calibrate::{
    calibrate, indirect_inference_single, write_front_csv, CalibrationReport, CalibrationSetup,
    CoverageSettings, CoverageTable, LobProblem, Metric, Nsga2Config, SingleConfig,
};
use crate::data::{
    intensity_correlation, order_size_histogram, read_events_file, replay_events, simulated_events, write_events_file,
    CorrelationTable, Matching, ReplayConfig, EVENT_HEADER,
};
use crate::error::Error;
use crate::rng::derive_seed;
use crate::sim::{read_snapshots_csv, simulate, AgentParams, ReferenceParams, SimConfig, Snapshot};
use crate::stochastic::OrderSizeModel;

pub const SEED_ENV: &str = "LOBFORGE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lobforge", version, about = "Stochastic-agent limit order book simulation and calibration")]
pub struct Cli {
    /// Worker threads for parallel evaluation (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate trading days and write snapshots, metadata and activity.
    Simulate(SimulateArgs),
    /// Calibrate agent parameters to an observed day.
    Calibrate(CalibrateArgs),
    /// Descriptive analytics of a day.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Agent parameters (full form, or the constrained form with `l_p`, `l_d`).
    #[arg(long)]
    pub params: PathBuf,
    /// Simulation settings.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Quote-to-trade ratio cap; must exceed 1.
    #[arg(long = "qtt-ratio")]
    pub qtt_ratio: Option<f64>,
    /// Independent days to simulate; more than one writes `rep_NNN/` folders.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Overrides the configured seed (falls back to LOBFORGE_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the day as an event CSV (`events.csv`) with its starting book.
    #[arg(long)]
    pub events: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Observed day: event CSV, snapshot CSV, or a simulation output folder.
    #[arg(long)]
    pub data: PathBuf,
    /// Search space and evaluation settings.
    #[arg(long)]
    pub bounds: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub pop: usize,
    #[arg(long, default_value_t = 40)]
    pub gens: usize,
    /// Realisations pooled per objective evaluation (overrides the bounds file).
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Run the single-objective keep-best search instead.
    #[arg(long)]
    pub single_objective: bool,
    /// Candidates evaluated by the single-objective search.
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    /// Weighting matrix (JSON rows) for a Mahalanobis single-objective distance.
    #[arg(long)]
    pub mahalanobis: Option<PathBuf>,
    /// Re-simulations per front member for a coverage check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub coverage_reps: usize,
    /// Keep every generation's population in the report.
    #[arg(long)]
    pub record_populations: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Options shared by subcommands that read a day.
#[derive(Debug, Args, Clone)]
pub struct DayArgs {
    /// Event CSV, snapshot CSV, or a simulation output folder.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Passive levels per side (event input only).
    #[arg(long = "l-p", default_value_t = 5)]
    pub l_p: usize,
    /// Aggressive levels per side (event input only).
    #[arg(long = "l-d", default_value_t = 3)]
    pub l_d: usize,
    #[arg(long, default_value_t = 10.0)]
    pub interval_seconds: f64,
    #[arg(long, default_value_t = 0.005)]
    pub tick_size: f64,
    /// Book resting before the first event (JSON, as written by `simulate --events`).
    #[arg(long)]
    pub initial_book: Option<PathBuf>,
    /// Restrict matching to the interval-start window, as the simulator does.
    #[arg(long)]
    pub window_matching: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Correlation of limit-order counts across levels (event input).
    Correlations(DayArgs),
    /// Histogram of limit-order sizes (event input).
    Sizes {
        #[command(flatten)]
        day: DayArgs,
        #[arg(long, default_value_t = 1)]
        bin_width: u64,
    },
    /// Auxiliary-model fit and return diagnostics.
    Aux {
        #[command(flatten)]
        day: DayArgs,
        #[arg(long, default_value_t = 1)]
        delta_minutes: u32,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
    /// Re-simulation coverage of a calibrated front.
    Coverage {
        #[command(flatten)]
        day: DayArgs,
        /// Calibration report (`report.json`) holding the front.
        #[arg(long)]
        front: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// An error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Failures while reading inputs are configuration errors.
fn input<T>(what: &Path, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::config(format!("{}: {e}", what.display())))
}

fn runtime<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let code = match e {
            Error::InvalidConfig(_) | Error::InvalidRatio(_) | Error::InsufficientReplications { .. } => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        CliError { code, message: e.to_string() }
    })
}

fn output<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError { code: EXIT_RUNTIME, message: format!("writing output: {e}") })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = input(path, fs::read_to_string(path).map_err(Error::from))?;
    input(path, serde_json::from_str(&text).map_err(Error::from))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    output(
        serde_json::to_string_pretty(value)
            .map_err(Error::from)
            .and_then(|s| fs::write(path, s + "\n").map_err(Error::from)),
    )
}

fn create_dir(dir: &Path) -> CliResult<()> {
    output(fs::create_dir_all(dir).map_err(Error::from))
}

/// Seed precedence: flag, then environment, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(fallback),
    }
}

/// Agent parameters in the constrained form, tied to a window size.
#[derive(Debug, Deserialize)]
struct ConstrainedParams {
    #[serde(flatten)]
    reference: ReferenceParams,
    l_p: usize,
    l_d: usize,
    #[serde(default = "unit_sizes")]
    order_size_model: OrderSizeModel,
}

fn unit_sizes() -> OrderSizeModel {
    OrderSizeModel::Constant { size: 1 }
}

/// Reads either the full parameter form or the constrained one.
pub fn load_params(path: &Path) -> CliResult<AgentParams> {
    let value: serde_json::Value = read_json(path)?;
    let params = match serde_json::from_value::<AgentParams>(value.clone()) {
        Ok(p) => p,
        Err(full) => match serde_json::from_value::<ConstrainedParams>(value) {
            Ok(c) => AgentParams::from_reference(&c.reference, c.l_p, c.l_d, c.order_size_model),
            Err(_) => return Err(CliError::config(format!("{}: {full}", path.display()))),
        },
    };
    input(path, params.validate())?;
    Ok(params)
}

/// A day as snapshots, read from any supported input.
pub struct Day {
    pub snapshots: Vec<Snapshot>,
    pub l_p: usize,
    pub l_d: usize,
}

fn first_line(path: &Path) -> CliResult<String> {
    let f = input(path, fs::File::open(path).map_err(Error::from))?;
    let mut line = String::new();
    input(path, BufReader::new(f).read_line(&mut line).map_err(Error::from))?;
    Ok(line.trim().to_string())
}

fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("snapshots.csv")
    } else {
        path.to_path_buf()
    }
}

fn is_event_file(path: &Path) -> CliResult<bool> {
    Ok(first_line(path)? == EVENT_HEADER)
}

fn replay_config(args: &DayArgs) -> CliResult<ReplayConfig> {
    let initial_book = args.initial_book.as_deref().map(read_json).transpose()?;
    Ok(ReplayConfig {
        interval_seconds: args.interval_seconds,
        tick_size: args.tick_size,
        initial_book,
        matching: if args.window_matching { Matching::Window } else { Matching::Unbounded },
        ..ReplayConfig::new(args.l_p, args.l_d)
    })
}

/// Loads a day. Event files are replayed with `replay`; snapshot files carry
/// their own window size.
pub fn load_day(path: &Path, replay: &ReplayConfig) -> CliResult<Day> {
    let path = resolve_data_path(path);
    if is_event_file(&path)? {
        let events = input(&path, read_events_file(&path))?;
        let snapshots = input(&path, replay_events(&events, replay).map(|r| r.snapshots))?;
        Ok(Day { snapshots, l_p: replay.l_p, l_d: replay.l_d })
    } else {
        let f = input(&path, fs::File::open(&path).map_err(Error::from))?;
        let (snapshots, l_p, l_d) = input(&path, read_snapshots_csv(BufReader::new(f)))?;
        Ok(Day { snapshots, l_p, l_d })
    }
}

fn fit_day(day: &Day, delta_minutes: u32) -> CliResult<AuxFit> {
    let series = runtime(transform(&day.snapshots, day.l_d, delta_minutes))?;
    runtime(fit_auxiliary(&[series]))
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    if let Some(q) = args.qtt_ratio {
        if !(q > 1.0) {
            return Err(CliError::config(format!("--qtt-ratio must be greater than 1, got {q}")));
        }
    }
    if args.reps == 0 {
        return Err(CliError::config("--reps must be at least 1"));
    }
    let params = load_params(&args.params)?;
    let mut config: SimConfig = read_json(&args.config)?;
    if args.qtt_ratio.is_some() {
        config.quote_to_trade_ratio = args.qtt_ratio;
    }
    if args.events {
        config.record_activity = true;
    }
    config.seed = resolve_seed(args.seed, config.seed)?;
    input(&args.config, config.validate())?;
    if let Some(v) = &config.variant {
        input(&args.params, v.check(&params))?;
    }
    create_dir(&args.out)?;
    for r in 0..args.reps {
        let mut cfg = config.clone();
        let dir = if args.reps == 1 {
            args.out.clone()
        } else {
            cfg.seed = derive_seed(config.seed, r as u64);
            args.out.join(format!("rep_{r:03}"))
        };
        let result = runtime(simulate(&params, &cfg))?;
        output(result.save(&dir))?;
        if args.events {
            let (events, book) = runtime(simulated_events(&result))?;
            output(write_events_file(&dir.join("events.csv"), &events))?;
            write_json(&dir.join("initial_book.json"), &book)?;
        }
    }
    Ok(())
}

fn cmd_calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let mut setup: CalibrationSetup = read_json(&args.bounds)?;
    if let Some(m) = args.m {
        setup.realisations = m;
    }
    input(&args.bounds, setup.validate())?;
    if args.pop < 2 {
        return Err(CliError::config("--pop must be at least 2"));
    }
    let metric = match &args.mahalanobis {
        Some(path) => Metric::Mahalanobis { weight: read_json(path)? },
        None => Metric::Euclidean,
    };
    let seed = resolve_seed(args.seed, 0)?;
    let replay = ReplayConfig {
        interval_seconds: setup.sim.interval_seconds,
        tick_size: setup.sim.tick_size,
        ..ReplayConfig::new(setup.l_p, setup.l_d)
    };
    let day = load_day(&args.data, &replay)?;
    if day.l_d != setup.l_d {
        return Err(CliError::config(format!(
            "data has {} aggressive levels but the bounds file expects {}",
            day.l_d, setup.l_d
        )));
    }
    let target = fit_day(&day, setup.delta_minutes)?;
    create_dir(&args.out)?;
    write_json(&args.out.join("target.json"), &target)?;
    let target = target.coefficients;

    if args.single_objective {
        let config = SingleConfig { iterations: args.iterations, seed, metric, kernel: setup.kernel.clone(), ..Default::default() };
        let problem = runtime(LobProblem::new(setup, target.clone()))?;
        let result = runtime(indirect_inference_single(&problem, &target.to_vec(), &config))?;
        let theta = runtime(problem.decode(
            &result.genes,
            result.sigma.as_ref().map(|rows| nalgebra::DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])).as_ref(),
        ))?;
        #[derive(Serialize)]
        struct SingleReport<'a> {
            setup: &'a CalibrationSetup,
            config: &'a SingleConfig,
            gene_names: &'a [String],
            result: &'a crate::calibrate::SingleResult,
            params: &'a AgentParams,
        }
        let report = SingleReport {
            setup: &problem.setup,
            config: &config,
            gene_names: problem.layout.names(),
            result: &result,
            params: &theta,
        };
        return write_json(&args.out.join("single.json"), &report);
    }

    let search = Nsga2Config {
        population: args.pop,
        generations: args.gens,
        seed,
        record_populations: args.record_populations,
        ..Default::default()
    };
    let coverage = (args.coverage_reps > 0).then(|| CoverageSettings {
        replications: args.coverage_reps,
        ..CoverageSettings::new(setup.sim.clone(), derive_seed(seed, u64::MAX))
    });
    let report = runtime(calibrate(setup, target, &search, coverage.as_ref()))?;
    write_json(&args.out.join("report.json"), &report)?;
    let mut csv = Vec::new();
    output(write_front_csv(&report, &mut csv))?;
    output(fs::write(args.out.join("front.csv"), csv).map_err(Error::from))?;
    if let Some(table) = &report.coverage {
        write_coverage(&args.out, table)?;
    }
    Ok(())
}

fn write_correlations(dir: &Path, table: &CorrelationTable) -> CliResult<()> {
    let mut text = format!("level,{}\n", table.labels.join(","));
    for (label, row) in table.labels.iter().zip(&table.matrix) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        text.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    output(fs::write(dir.join("correlations.csv"), text).map_err(Error::from))?;
    write_json(&dir.join("correlations.json"), table)
}

fn write_coverage(dir: &Path, table: &CoverageTable) -> CliResult<()> {
    let mut text = format!("solution,{},valid,failed\n", table.names.join(","));
    for row in &table.rows {
        let cells: Vec<&str> = row.covered.iter().map(|&c| if c { "1" } else { "0" }).collect();
        text.push_str(&format!(
            "{},{},{},{}\n",
            row.solution + 1,
            cells.join(","),
            row.valid_replications,
            row.failed_replications
        ));
    }
    let props: Vec<String> = table.proportions.iter().map(|p| format!("{p}")).collect();
    text.push_str(&format!("proportion,{},,\n", props.join(",")));
    output(fs::write(dir.join("coverage.csv"), text).map_err(Error::from))?;
    write_json(&dir.join("coverage.json"), table)
}

fn require_events(day: &DayArgs) -> CliResult<Vec<crate::data::EventRecord>> {
    let path = resolve_data_path(&day.data);
    if !is_event_file(&path)? {
        return Err(CliError::config(format!("{} is not an event file (header `{EVENT_HEADER}`)", path.display())));
    }
    input(&path, read_events_file(&path))
}

fn cmd_analyze(cmd: &AnalyzeCommand) -> CliResult<()> {
    match cmd {
        AnalyzeCommand::Correlations(day) => {
            let events = require_events(day)?;
            let table = runtime(intensity_correlation(&events, &replay_config(day)?))?;
            create_dir(&day.out)?;
            write_correlations(&day.out, &table)
        }
        AnalyzeCommand::Sizes { day, bin_width } => {
            let events = require_events(day)?;
            let hist = runtime(order_size_histogram(&events, *bin_width))?;
            create_dir(&day.out)?;
            let mut text = String::from("lower,upper,count\n");
            for (k, c) in hist.counts.iter().enumerate() {
                let (lo, hi) = hist.bin_range(k);
                text.push_str(&format!("{lo},{hi},{c}\n"));
            }
            output(fs::write(day.out.join("sizes.csv"), text).map_err(Error::from))
        }
        AnalyzeCommand::Aux { day, delta_minutes, max_lag } => {
            let d = load_day(&day.data, &replay_config(day)?)?;
            let series = runtime(transform(&d.snapshots, d.l_d, *delta_minutes))?;
            let fit = runtime(fit_auxiliary(std::slice::from_ref(&series)))?;
            let (acf, pacf) = runtime(acf_pacf(&series.returns, *max_lag))?;
            let squared: Vec<f64> = series.returns.iter().map(|r| r * r).collect();
            let (acf_sq, _) = runtime(acf_pacf(&squared, *max_lag))?;
            let (lm_stat, lm_p) = runtime(arch_lm_test(&series.returns, 5))?;
            #[derive(Serialize)]
            struct AuxReport {
                fit: AuxFit,
                returns: usize,
                acf: Vec<f64>,
                pacf: Vec<f64>,
                acf_squared: Vec<f64>,
                arch_lm_stat: f64,
                arch_lm_p: f64,
            }
            create_dir(&day.out)?;
            let report = AuxReport {
                fit,
                returns: series.returns.len(),
                acf,
                pacf,
                acf_squared: acf_sq,
                arch_lm_stat: lm_stat,
                arch_lm_p: lm_p,
            };
            write_json(&day.out.join("aux.json"), &report)
        }
        AnalyzeCommand::Coverage { day, front, reps, level, seed } => {
            let Some(front) = front else {
                return Err(CliError::config("analyze coverage requires --front <report.json>"));
            };
            let report: CalibrationReport = read_json(front)?;
            let d = load_day(&day.data, &replay_config(day)?)?;
            let observed = fit_day(&d, report.setup.delta_minutes)?.coefficients;
            let settings = CoverageSettings {
                replications: *reps,
                level: *level,
                delta_minutes: report.setup.delta_minutes,
                ..CoverageSettings::new(report.setup.sim.clone(), resolve_seed(*seed, 0)?)
            };
            let table = runtime(crate::calibrate::coverage_analysis(&report.front_params, &observed, &settings))?;
            create_dir(&day.out)?;
            write_coverage(&day.out, &table)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let stderr = std::io::stderr();
            let mut w = BufWriter::new(stderr.lock());
            let _ = writeln!(w, "error: {}", e.message);
            e.code
        }
    }
}
