use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 1,
                CliError::Io(_) => 2,
            })
        }
    }
}
