mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use klkit::Error;

use crate::config::Cli;

/// Exit code for bad input: flags, config files, spectrum files.
const EXIT_BAD_INPUT: u8 = 2;
/// Exit code for a numerical failure such as a non-converged eigensolve.
const EXIT_NUMERICAL: u8 = 3;

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("KLKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::InvalidArgument(format!("KLKIT_THREADS must be a positive integer, got `{raw}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("KLKIT_THREADS: {e}")))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } | Error::EmptySpectrum(_) => EXIT_NUMERICAL,
        _ => EXIT_BAD_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_BAD_INPUT } else { 0 });
        }
    };
    let result = configure_threads()
        .and_then(|()| cli.resolve())
        .and_then(commands::run);
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("klkit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
