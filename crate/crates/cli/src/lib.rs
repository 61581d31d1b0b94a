//! Configuration, run orchestration and output for the `solver` binary.

pub mod analyze;
pub mod config;
pub mod runner;

pub use config::{parse_config, ConfigError, RunConfig};
pub use runner::{run, RunError, RunSummary, OUTPUT_DIR_ENV};
