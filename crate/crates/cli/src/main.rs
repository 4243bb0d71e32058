mod commands;
mod config;
mod error;
mod export;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, CommandName, RunConfig};
use crate::error::{usage, CliError, CliResult};

/// Environment variable that fixes the number of worker threads.
const THREADS_VAR: &str = "MPI_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            usage(format!(
                "{THREADS_VAR} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| usage(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let config = RunConfig::from_cli(cli)?;
    let outcome = match config.command.expect("from_cli requires a command") {
        CommandName::Distribution => commands::distribution(&config)?,
        CommandName::Enhancement => commands::enhancement_grid(&config)?,
        CommandName::Suppression => commands::suppression(&config)?,
        CommandName::Verify => verify::verify(&config)?,
    };
    export::emit(
        &outcome.report,
        config.format(),
        config.output_path.as_deref(),
    )?;
    match outcome.failure {
        Some(reason) => Err(CliError::Verification(reason)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
