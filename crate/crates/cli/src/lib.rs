//! Scenario files, command implementations and CSV output for the
//! `nlspread` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use scenario::Scenario;
