//! Configuration, orchestration and reporting behind the `nlslab` binary.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod report;
pub mod runner;

pub use config::{Command, RunConfig};
pub use error::{CliError, CliResult};
pub use manifest::Manifest;
