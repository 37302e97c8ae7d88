use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LscError>;

#[derive(Debug, Error)]
pub enum LscError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sequence must not be empty")]
    EmptySequence,

    #[error("line of length {len} is shorter than the smoothing window {window}; disable smoothing or use a smaller window")]
    LineTooShort { len: usize, window: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("k = {k} exceeds the number of samples ({n})")]
    TooManyClusters { k: usize, n: usize },

    #[error("cluster {0} has no members; reseed it before updating centers")]
    EmptyGroup(usize),

    #[error("silhouette is undefined for fewer than two clusters")]
    SingleCluster,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LscError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LscError::Io {
            path: path.into(),
            source,
        }
    }
}
