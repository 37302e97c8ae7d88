use std::path::PathBuf;

use lsc_core::LscError;

/// Exit code for invalid flags, config keys or flag combinations.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for unreadable or malformed input data.
pub const EXIT_DATA: i32 = 3;
/// Exit code for failures while running or writing results.
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Runtime(_) | CliError::Write { .. } => EXIT_RUNTIME,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }
}

impl From<LscError> for CliError {
    fn from(e: LscError) -> Self {
        match e {
            LscError::InvalidConfig(_)
            | LscError::TooManyClusters { .. }
            | LscError::LineTooShort { .. } => CliError::Usage(e.to_string()),
            LscError::InvalidInput(_)
            | LscError::NonFinite { .. }
            | LscError::DimensionMismatch { .. }
            | LscError::Parse { .. }
            | LscError::Csv(_)
            | LscError::Io { .. } => CliError::Data(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
