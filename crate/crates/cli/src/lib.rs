//! Library side of the `ttrace` command: configuration, subcommands and their artifacts.

pub mod bench;
pub mod config;
pub mod diagnose;
pub mod error;
pub mod oracle;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
