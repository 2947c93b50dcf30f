//! Configuration, experiment commands and CSV output for the command-line tool.

pub mod commands;
pub mod config;
pub mod csv;

pub use commands::{run, Command, Output};
pub use config::ExperimentConfig;
