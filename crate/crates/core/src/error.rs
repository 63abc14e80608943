use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("empty mask")]
    EmptyMask,

    #[error("nonpositive scale: {0}")]
    NonpositiveScale(f64),

    #[error("correspondence off-grid at pixel (row {row}, col {col})")]
    CorrespondenceOffGrid { row: usize, col: usize },

    #[error("off-image proposal")]
    OffImageProposal,

    #[error("no proposals")]
    NoProposals,

    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status for the command-line front end: 1 for usage and
    /// configuration problems, 2 for everything data related.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            _ => 2,
        }
    }
}
