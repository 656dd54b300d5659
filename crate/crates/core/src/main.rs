use std::process::ExitCode;

use clap::Parser;
use edge_ghost::cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edge-ghost: {e}");
            ExitCode::FAILURE
        }
    }
}
