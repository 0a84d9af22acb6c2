//! The `paxflow` command line: config-driven pipeline stages writing into
//! one output directory (`ingest/`, `calibrate/`, `simulate/`, `analyze/`).
//!
//! Exit codes: 1 configuration, 2 ingest, 3 calibrate, 4 simulate, 5 analyze.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use thiserror::Error;

pub use config::{
    AnalysisSection, CalibrationSection, Inputs, Overrides, RunConfig, SimulationSection, StaffingMode,
    StaffingSection, Zones,
};
pub use stages::{
    analyze, calibrate, ingest, simulate, AnalysisSummary, CalibrationReport, DaySummary, IngestReport,
    SimulationSummary, ValidationBlock, ANALYZE_DIR, CALIBRATE_DIR, INGEST_DIR, SIMULATE_DIR,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("ingest: {0}")]
    Ingest(String),
    #[error("calibrate: {0}")]
    Calibrate(String),
    #[error("simulate: {0}")]
    Simulate(String),
    #[error("analyze: {0}")]
    Analyze(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Ingest(_) => 2,
            CliError::Calibrate(_) => 3,
            CliError::Simulate(_) => 4,
            CliError::Analyze(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "paxflow", version, about = "Immigration-hall passenger flow simulation pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and clean the CSV inputs into a dataset bundle.
    Ingest,
    /// Fit the walk-speed and service-rate models.
    Calibrate,
    /// Simulate every day of the configured range.
    Simulate,
    /// Delay, saturation and validation statistics.
    Analyze,
    /// All four stages in order.
    All,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; day i of the range runs with seed + i.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Bin width in seconds.
    #[arg(long, global = true)]
    pub bin_width: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub staffing_mode: Option<StaffingMode>,
    /// Queue length above which the policy opens a desk.
    #[arg(long, global = true)]
    pub upper: Option<usize>,
    /// Queue length below which the policy closes a desk.
    #[arg(long, global = true)]
    pub lower: Option<usize>,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            bin_width_s: self.bin_width,
            output: self.out.clone(),
            staffing_mode: self.staffing_mode,
            upper: self.upper,
            lower: self.lower,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.flags.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config = RunConfig::load(path, &cli.flags.overrides())?;
    match cli.command {
        Command::Ingest => ingest(&config).map(drop),
        Command::Calibrate => calibrate(&config).map(drop),
        Command::Simulate => simulate(&config).map(drop),
        Command::Analyze => analyze(&config).map(drop),
        Command::All => {
            ingest(&config)?;
            calibrate(&config)?;
            simulate(&config)?;
            analyze(&config).map(drop)
        }
    }
}

/// Entry point of the `paxflow` binary. Verbosity follows `PAXFLOW_LOG`.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PAXFLOW_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("paxflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
