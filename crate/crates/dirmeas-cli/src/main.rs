//! Command-line front end: JSON run configs in, CSV/JSON result files out.
//!
//! Exit codes: 0 success, 1 run or audit failure, 2 usage/config error.

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::OutputFormat;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Run(String),
    #[error("audit failed: {0}")]
    Audit(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dirmeas",
    version,
    about = "Direct wave-function measurement simulator: exact pointer statistics, \
             finite-shot experiments, reconstruction, and identity audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit the protocol's exact identities at the configured coupling(s)
    Verify(CommonArgs),
    /// Reconstruct the configured state with each requested mode
    Reconstruct(CommonArgs),
    /// Sweep the coupling strength and fit the error-scaling exponent
    Sweep(CommonArgs),
    /// Simulate the counting experiment and write the per-setting tallies
    Sample(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output path (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (overrides the config)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Master seed for experiment substreams (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match runner::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
