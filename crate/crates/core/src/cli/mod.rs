//! Command-line front end: scenario files, output files and the subcommands.

pub mod commands;
mod config;
mod expr;
pub mod io;
pub mod verify;

pub use config::{load_config, parse_config, LoadedConfig, OutputConfig};
pub use expr::Expression;
