//! Configuration, experiment runners and CSV artifacts for the `qreservoir`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod seeds;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiments::{execute, run, Execution, Report};
