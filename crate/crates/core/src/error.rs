//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown problem id `{0}` (expected F1..F20)")]
    UnknownProblem(String),

    #[error("evaluation budget exhausted: requested {requested}, remaining {remaining} of {max_fes}")]
    BudgetExhausted {
        requested: u64,
        remaining: u64,
        max_fes: u64,
    },

    #[error("point out of bounds in dimension {dim}: {value} not in [{lower}, {upper}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("training diverged at epoch {epoch} (non-finite loss); partial trace has {} entries", trace.len())]
    TrainingDiverged { epoch: usize, trace: Vec<f64> },

    #[error("all descent points were labeled noise; peak archive is empty")]
    EmptyArchive,

    #[error("local search launched with zero remaining budget")]
    ZeroBudget,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("surrogate grid dump only supports dimension <= 2, got {0}")]
    GridDimension(usize),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
