//! `rlf`: detect responsive layout failures in a captured page, localize the
//! responsible CSS and rank the candidates.
//!
//! Data goes to stdout (or `-o`), diagnostics to stderr. Exit codes: 0 ok,
//! 1 validation error, 2 internal error.

mod commands;
mod options;

use std::panic;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::commands::CliError;
use crate::options::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match panic::catch_unwind(|| commands::dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(CliError::INTERNAL)
        }
    }
}
