//! The `qmdn` command-line tool.
//!
//! Five subcommands cover the pipeline: `gen-data`, `train`, `eval`, `plot`
//! and `report`. Options can also come from a plain-text config file given
//! with `--config` (`key = value` per line, `#` comments); flags override it.
//! Default output paths live under `$QMDN_OUTPUT_ROOT` (or `./out`).
//!
//! Exit status is 0 on success, 2 for configuration or input errors and 3
//! when a computation aborts.

mod config;
mod evaluate;
mod manifest;
mod pipeline;
mod plot;
mod report;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::data::Benchmark;
use crate::models::ModelKind;

pub use config::ConfigFile;
pub use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "QMDN_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lib(e) if e.is_config_error() => EXIT_CONFIG,
            CliError::Lib(_) => EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qmdn", version, about = "Mixture-density networks with classical and quantum-circuit heads")]
pub struct Cli {
    /// Plain-text `key = value` file supplying defaults for any option.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark dataset (CSV plus `.meta` sidecar).
    GenData(GenDataArgs),
    /// Train an ensemble of one model family.
    Train(TrainArgs),
    /// Evaluate trained models: held-out NLL, densities, modes, KL.
    Eval(EvalArgs),
    /// Render SVG figures from an evaluation directory.
    Plot(PlotArgs),
    /// Summarize parameter counts and headline numbers.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    pub benchmark: Benchmark,
    /// Number of rows. Logistic data needs a multiple of 100 (iterates per x).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for the double-slit sampler (logistic data is deterministic).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long, value_name = "CSV")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, alias = "ensemble")]
    pub ensemble_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub strict_sequential: bool,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory holding `*.model` files from `train`.
    #[arg(long, value_name = "DIR")]
    pub models: Option<PathBuf>,
    /// Held-out dataset.
    #[arg(long, value_name = "CSV")]
    pub data: Option<PathBuf>,
    /// Defaults to the generator recorded in the dataset's metadata.
    #[arg(long)]
    pub benchmark: Option<Benchmark>,
    /// Rows drawn from each model for scatter plots.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for the prediction samples.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Output directory of `eval`.
    #[arg(long, value_name = "DIR")]
    pub eval: Option<PathBuf>,
    /// Directory with `*_loss.csv` histories; defaults to the evaluated models' directory.
    #[arg(long, value_name = "DIR")]
    pub runs: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One or more `eval` output directories.
    #[arg(long = "eval", value_name = "DIR")]
    pub evals: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Default output root: `$QMDN_OUTPUT_ROOT` or `out`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::GenData(a) => pipeline::gen_data(a, &cfg),
        Command::Train(a) => pipeline::train(a, &cfg),
        Command::Eval(a) => evaluate::eval(a, &cfg),
        Command::Plot(a) => plot::plot(a, &cfg),
        Command::Report(a) => report::report(a, &cfg),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
