//! Command-line front end: configuration, subcommands and report files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scoring;

pub use commands::{run, Cli};
pub use config::RunConfig;
pub use error::CliError;
