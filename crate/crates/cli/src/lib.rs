//! Command-line driver for `lfpclass`: synthetic data generation, signal
//! estimation, classifier benchmarks and the Monte-Carlo experiments.
//!
//! Exit codes: 0 success, 2 validation error, 3 runtime or numeric error.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<lfpclass::Error> for CliError {
    fn from(e: lfpclass::Error) -> Self {
        match e {
            lfpclass::Error::SingularCovariance => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<lfpclass::io::FormatError> for CliError {
    fn from(e: lfpclass::io::FormatError) -> Self {
        match e {
            lfpclass::io::FormatError::Io(io) => CliError::Runtime(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lfpclass", version, about = "Fourier-shrinkage estimation and classification of noisy signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Pinsker,
    Bjs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Loso,
    Kfold,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic dataset (CSV plus `.meta` sidecar).
    Synth,
    /// Shrink the Fourier coefficients of one signal and reconstruct it.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Cross-validate a classifier pipeline on a dataset.
    Benchmark {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        pipeline: Method,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        /// Search shrinkage masks, T and P instead of using one setting.
        #[arg(long)]
        grid: bool,
    },
    /// Run a named experiment: rates, adaptivity, consistency or phase.
    Experiment { name: String },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the configuration and dispatches; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for assignment in &cli.set {
        cfg.set(assignment)?;
    }
    let outputs = match &cli.command {
        Command::Synth => commands::synth(&cfg, cli.seed)?,
        Command::Estimate { input, method } => commands::estimate(&cfg, input, *method)?,
        Command::Benchmark {
            input,
            pipeline,
            scheme,
            grid,
        } => commands::benchmark(&cfg, input, *pipeline, *scheme, *grid, cli.seed)?,
        Command::Experiment { name } => commands::experiment(&cfg, name, cli.seed)?,
    };
    commands::write_outputs(&cli.out, &outputs)
}
