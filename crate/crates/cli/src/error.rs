use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const FEASIBLE: u8 = 0;
    pub const INFEASIBLE: u8 = 1;
    pub const ITERATION_LIMIT: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const VALIDATION: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown example '{name}' (available: {available})")]
    UnknownExample { name: String, available: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] copostab_core::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Every error maps to the input/precondition exit code.
    pub fn exit_code(&self) -> u8 {
        exit::INPUT
    }
}
