//! Command-line front end: system documents, the benchmark registry, the
//! `check`, `simulate`, `discretize` and `sweep` commands, and JSON reports.

pub mod commands;
pub mod document;
pub mod error;
pub mod registry;
pub mod report;
pub mod table;

pub use error::{exit, CliError, Result};
