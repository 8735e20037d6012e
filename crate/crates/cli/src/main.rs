mod config;
mod evaluate;
mod select;
mod simulate;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use nucs_core::{ErrorKind, NucsError};

use crate::config::{EvaluateArgs, SelectArgs, SimulateArgs};

#[derive(Debug, Parser)]
#[command(
    name = "nucs",
    version,
    about = "Class-aware coreset selection from difficulty scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select a coreset and write the selection CSV plus a JSON report.
    Select(Box<SelectArgs>),
    /// Sweep the two-class Gaussian allocation model.
    Simulate(SimulateArgs),
    /// Per-class recall metrics for a set of predictions.
    Evaluate(EvaluateArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(NucsError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numeric => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => f.write_str(msg),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<NucsError> for CliError {
    fn from(e: NucsError) -> Self {
        CliError::Core(e)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NUCS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Config(format!(
            "NUCS_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Select(args) => select::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Evaluate(args) => evaluate::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nucs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
