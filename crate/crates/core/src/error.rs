use std::path::PathBuf;

use crate::models::StrategyTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("integration diverged at node {node} (t = {time})")]
    Diverged { node: usize, time: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("trajectory shape mismatch: {0}")]
    Shape(String),

    #[error("trajectories are sampled on different time grids")]
    GridMismatch,

    #[error("population counts sum to {sum}, expected total {total}")]
    InconsistentPopulation { sum: f64, total: f64 },

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("strategy {strategy} expects {expected} control value(s), got {got}")]
    Arity {
        strategy: StrategyTag,
        expected: usize,
        got: usize,
    },

    #[error("strategy {strategy} does not belong to the {expected} model")]
    ModelMismatch {
        strategy: StrategyTag,
        expected: &'static str,
    },

    #[error("strategy {0} has no controls, so no adjoint system is defined")]
    NoAdjoint(StrategyTag),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("scenarios cannot be compared: {0}")]
    ComparisonIncompatible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than numerical or I/O failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Parse { .. }
                | Error::InvalidGrid(_)
                | Error::InconsistentPopulation { .. }
                | Error::InvalidPopulation(_)
                | Error::ModelMismatch { .. }
                | Error::NoAdjoint(_)
                | Error::ComparisonIncompatible(_)
        )
    }
}
