//! `qfdr`: runs one experiment and writes `<out>/<experiment>.csv` plus a
//! JSON sidecar.
//!
//! Exit codes: 0 success, 2 invalid input or I/O failure, 3 numerical
//! failure (non-convergence, non-finite result).

mod commands;
mod config;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use config::Config;
use error::{CliError, CliResult};
use table::{write_outputs, RunInfo};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    /// Exact vs slow-driving work statistics for a driven qubit
    FdrVerify,
    /// Oscillator fluctuation and dissipation metrics over β
    OscillatorMetrics,
    /// Optimal oscillator frequency schedule for one α
    Geodesic,
    /// Fluctuation/dissipation trade-off fronts
    Pareto,
    /// Strong-coupling quench chains
    Quench,
    /// Two-point-measurement work distribution
    OracleTpm,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::FdrVerify => "fdr-verify",
            Experiment::OscillatorMetrics => "oscillator-metrics",
            Experiment::Geodesic => "geodesic",
            Experiment::Pareto => "pareto",
            Experiment::Quench => "quench",
            Experiment::OracleTpm => "oracle-tpm",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qfdr", version, about = "Work fluctuation and dissipation experiments")]
struct Args {
    /// Experiment to run
    #[arg(value_enum)]
    experiment: Experiment,

    /// `key = value` file with experiment parameters
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, short, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,

    /// RNG seed for randomised models
    #[arg(long)]
    seed: Option<u64>,

    /// Parameter override, repeatable; wins over the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn run(args: &Args) -> CliResult<()> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for s in &args.sets {
        cfg.set(s)?;
    }
    if let Some(seed) = args.seed {
        cfg.set(&format!("seed={seed}"))?;
    }

    let name = args.experiment.name();
    let runner = commands::lookup(name).expect("every experiment has a runner");
    let started = Instant::now();
    let table = runner(&cfg)?;
    let info = RunInfo {
        parameters: cfg.resolved(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let (csv, json) = write_outputs(&args.out, &table, &info)?;
    log::info!("{name}: {} rows in {:.2} s", table.rows.len(), info.wall_time_s);
    println!("{}", csv.display());
    println!("{}", json.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
