//! The `eulerbench` workbench: configuration, persistence, orchestration and reporting.

pub mod acceptance;
pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod snapshot;

pub use error::{exit, CliError, Result};
