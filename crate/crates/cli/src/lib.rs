//! Command-line front end for `fasuav-core`: TOML configuration, sweep tables
//! written as CSV, and the validation suite.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;
pub mod validate;

pub use config::{load_config, parse_config, ExperimentSpec};
pub use error::CliError;
pub use experiments::{run, run_to_csv, Command};
