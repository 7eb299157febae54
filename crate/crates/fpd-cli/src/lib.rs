//! Command-line workflow around the divider synthesis and simulation
//! engines: config loading, artifact generation, and the target-comparison
//! report. The binary in main.rs is a thin clap wrapper over this crate.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{load_config, RunConfig};
pub use error::{CliError, Result};
