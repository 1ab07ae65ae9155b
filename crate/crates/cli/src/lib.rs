//! Command-line front end for `simulcap`: scenario documents, CSV and SVG
//! artifacts, and the subcommands that produce them.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plots;

pub use config::{parse_scenario, ScenarioConfig};
pub use error::{CliError, ConfigError};
