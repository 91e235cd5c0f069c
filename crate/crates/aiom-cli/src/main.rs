//! aiom — run oracle machines from config files, drive the two reference
//! machines, run simulations, and replay transcripts.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 run or limit error,
//! 3 backend error. Diagnostics go to stderr prefixed with `aiom: error:`.

mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("aiom: error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Run(_) => 2,
            CliError::Backend(_) => 3,
        }
    }
}
