use std::process::ExitCode;

use clap::Parser;

use qtorus_cli::cli::Cli;

fn main() -> ExitCode {
    match qtorus_cli::execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
