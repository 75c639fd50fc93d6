// SPDX-License-Identifier: MIT OR Apache-2.0

//! `seedbs` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 unreadable or malformed
//! input.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use seedbs::harness::{
    self, DetectionConfig, ModelSelection, NoiseChoice, Selection, SimMethod, SimulationSpec,
    DEFAULT_AUGMENT_BELOW, DEFAULT_DECAY, DEFAULT_WBS_DRAWS,
};
use seedbs::series_io::read_series;
use seedbs::signals::{load_signal_spec, named_signal, PiecewiseSignal};

#[derive(Parser)]
#[command(
    name = "seedbs",
    version,
    about = "Seeded binary segmentation for change-in-mean detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect change points in a series file and print a JSON report.
    Detect(DetectArgs),
    /// Print every noise level estimate for a series file as JSON.
    Noise {
        /// One value per line; `#` comments and a single header line allowed.
        file: PathBuf,
    },
    /// Monte Carlo simulation on a named or file-defined signal.
    Simulate(SimulateArgs),
    /// Interval counts and greedy-path timings for a list of lengths.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// One value per line; `#` comments and a single header line allowed.
    file: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ConfigArgs {
    /// Seeded interval decay, in (1, 2].
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    decay: f64,
    /// Smallest seeded interval length.
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    /// Add every interval shorter than this; 0 disables.
    #[arg(long, default_value_t = DEFAULT_AUGMENT_BELOW)]
    augment_below: usize,
    /// greedy | not | aseedbs | wbs
    #[arg(long, default_value = "greedy")]
    selection: Selection,
    /// Number of random intervals (wbs only).
    #[arg(long = "M", short = 'M', visible_alias = "wbs-draws")]
    m: Option<usize>,
    /// Random interval seed (wbs only).
    #[arg(long)]
    seed: Option<u64>,
    /// jfnl | jfnl_tilde | jfnl_lag(J1,J2) | mad | ensemble
    #[arg(long, default_value = "jfnl")]
    noise_method: NoiseChoice,
    /// threshold | bic_unknown | bic_known
    #[arg(long, default_value = "threshold")]
    model_sel: ModelSelection,
    /// Threshold constant in C * sigma_hat * sqrt(2 ln T).
    #[arg(long = "C", short = 'C', default_value_t = 1.0)]
    c: f64,
}

impl From<ConfigArgs> for DetectionConfig {
    fn from(a: ConfigArgs) -> Self {
        DetectionConfig {
            decay: a.decay,
            min_len: a.min_len,
            augment_below: a.augment_below,
            selection: a.selection,
            wbs_draws: a.m,
            seed: a.seed,
            noise_method: a.noise_method,
            model_sel: a.model_sel,
            c: a.c,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Signal name (extreme.teeth, stairs10) or path to a JSON signal spec.
    #[arg(long, default_value = "extreme.teeth")]
    scenario: String,
    /// Comma-separated noise levels.
    #[arg(long = "sigma", value_delimiter = ',', default_value = "0.3")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Comma-separated method names, e.g. seedbs_thr_jfnl,wbs_thr_mad.
    #[arg(long, value_delimiter = ',', default_value = "seedbs_thr_jfnl")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Random intervals per run for wbs methods.
    #[arg(long, default_value_t = DEFAULT_WBS_DRAWS)]
    wbs_draws: usize,
    /// Write the JSON summary here instead of stderr.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Print the full report as JSON instead of CSV rows.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated series lengths.
    #[arg(
        long = "t-list",
        value_delimiter = ',',
        default_value = "1024,2048,4096,8192,16384,32768,65536"
    )]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    decay: f64,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<seedbs::Error> for Failure {
    fn from(e: seedbs::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: if e.kind() == io::ErrorKind::BrokenPipe {
                0
            } else {
                1
            },
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => e.into(),
            other => Failure {
                code: 1,
                message: format!("{other:?}"),
            },
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        match e.io_error_kind() {
            Some(kind) => io::Error::from(kind).into(),
            None => Failure {
                code: 1,
                message: e.to_string(),
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => run_detect(a),
        Command::Noise { file } => run_noise(&file),
        Command::Simulate(a) => run_simulate(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run_detect(args: DetectArgs) -> Result<(), Failure> {
    let config = DetectionConfig::from(args.config);
    config.validate()?;
    let series = read_series(&args.file)?;
    let report = harness::detect(&series, &config)?;
    print_json(&report)
}

fn run_noise(file: &Path) -> Result<(), Failure> {
    let series = read_series(file)?;
    let estimates = harness::all_noise_estimates(&series)?;
    let out = json!({ "n": series.len(), "estimates": estimates });
    print_json(&out)
}

fn load_scenario(scenario: &str) -> Result<PiecewiseSignal, Failure> {
    if let Some(s) = named_signal(scenario) {
        return Ok(s);
    }
    let path = Path::new(scenario);
    if path.exists() {
        return Ok(load_signal_spec(path)?);
    }
    Err(Failure {
        code: 2,
        message: format!("unknown scenario `{scenario}` (not a signal name or an existing file)"),
    })
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let methods = args
        .methods
        .iter()
        .map(|m| SimMethod::parse(m, args.wbs_draws))
        .collect::<seedbs::Result<Vec<_>>>()?;
    let signal = load_scenario(&args.scenario)?;
    let spec = SimulationSpec {
        scenario: args.scenario,
        signal,
        sigmas: args.sigmas,
        reps: args.reps,
        methods,
        base_seed: args.base_seed,
        workers: args.workers,
    };
    let report = harness::simulate(&spec)?;

    if args.json {
        return print_json(&report);
    }
    let mut out = io::stdout().lock();
    writeln!(out, "# config: {}", serde_json::to_string(&report.config)?)?;
    let mut w = csv::Writer::from_writer(&mut out);
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);

    let summary = json!({
        "config": report.config,
        "true_change_points": report.true_change_points,
        "summary": report.summary,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    match args.summary {
        Some(path) => std::fs::write(&path, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let rows = harness::bench(
        &args.lengths,
        args.decay,
        args.min_len,
        args.repeats,
        args.seed,
    )?;
    let mut out = io::stdout().lock();
    let config = json!({
        "t_list": args.lengths,
        "decay": args.decay,
        "min_len": args.min_len,
        "repeats": args.repeats,
        "seed": args.seed,
    });
    writeln!(out, "# config: {config}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
