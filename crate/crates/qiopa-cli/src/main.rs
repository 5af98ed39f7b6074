//! qiopa: deterministic CSV/JSON data for amplified-macrostate and
//! coherent-superposition figures.

use clap::Parser;

mod artifact;
mod commands;
mod sweep;

use commands::{Cli, CliError};

fn main() {
    match commands::run(Cli::parse()) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Numeric(msg)) | Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}
