use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qreservoir::config::ExperimentKind;
use qreservoir::{execute, CliError, ExperimentConfig};

/// Quantum extreme learning, circuit learning and reservoir computing experiments.
#[derive(Debug, Parser)]
#[command(name = "qreservoir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config and write its artifacts.
    Run { config: PathBuf },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let done = execute(&cfg)?;
            for path in &done.artifacts {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({})", config.display(), cfg.experiment);
        }
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<14} {}", kind.name(), kind.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
