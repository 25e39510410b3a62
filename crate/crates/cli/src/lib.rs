//! Scenario runner: configuration parsing, end-to-end runs and output files.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use run::{run_scenario, RunReport};
