use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("frame out of order: expected t = {expected}, got t = {got}")]
    OutOfOrder { expected: f64, got: f64 },

    #[error("unbalanced design: {0}")]
    Unbalanced(String),

    #[error("F statistic undefined: error mean square is zero")]
    UndefinedF,

    #[error("empty observation table")]
    EmptyTable,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code: 3 for bad input, 4 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Calibration(_)
            | Error::OutOfOrder { .. }
            | Error::Unbalanced(_)
            | Error::EmptyTable
            | Error::Json(_) => 3,
            Error::UndefinedF | Error::Io { .. } => 4,
        }
    }
}
