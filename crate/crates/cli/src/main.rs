//! `ballwalk`: run a ball-walk experiment from a configuration file.
//!
//! Exit codes: 0 every gate passed, 1 a gate failed, 2 configuration error,
//! 3 numerical failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ballwalk_core::Error;
use config::ExperimentConfig;
use report::Report;

#[derive(Parser)]
#[command(name = "ballwalk", version, about = "Spectral analysis and simulation of the ball walk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the JSON and CSV reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Top eigenvalues of the symmetrized operator against their semiclassical limits.
    Spectrum,
    /// Spectral gap over a sweep of step sizes.
    GapSweep,
    /// Eigenvalue counts near 1 against the Weyl-type bound.
    Weyl,
    /// Monte-Carlo paths and their empirical TV to the stationary law.
    Simulate,
    /// Exact grid TV curve with upper and lower bounds.
    Tv,
    /// Essential-spectrum band of a tempered density.
    Band,
    /// Table of the ball multiplier `G_d`.
    DumpMultiplier,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot size the thread pool: {e}")))?;
    }
    let report: Report = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg),
        Command::GapSweep => commands::gap_sweep(&cfg),
        Command::Weyl => commands::weyl(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Tv => commands::tv(&cfg),
        Command::Band => commands::band(&cfg),
        Command::DumpMultiplier => commands::dump_multiplier(&cfg),
    }?;
    let files = report
        .write(&cli.out, &cfg)
        .map_err(|e| Failure::Numeric(format!("cannot write reports: {e}")))?;
    println!("{}", report.summary());
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
