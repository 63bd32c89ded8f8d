mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use log::debug;

use cli::{Cli, RunConfig};
use commands::{Failure, EXIT_CHECK_FAILED};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CACHECAST_LOG", "warn")).init();
    let cli = Cli::parse();

    let result = RunConfig::from_command(&cli.command)
        .map_err(Failure::usage)
        .and_then(|cfg| {
            debug!("run config {}", serde_json::to_string(&cfg).unwrap_or_default());
            commands::run(&cli.command)
        });

    match result {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(f) => {
            if cli.error_json {
                eprintln!("{}", f.to_json());
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code as u8)
        }
    }
}
