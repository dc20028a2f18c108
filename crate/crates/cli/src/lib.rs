//! Scenario files, subcommands and artifact writers behind the `stochreach`
//! binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{load, parse, Scenario, ScenarioConfig, SystemKind};
pub use error::CliError;
