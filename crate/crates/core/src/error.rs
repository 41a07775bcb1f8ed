use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative kernel hit its iteration cap; `best_estimate` is the last iterate.
    #[error("numeric failure: {message} (best estimate {best_estimate})")]
    NumericFailure { message: String, best_estimate: f64 },

    #[error("target has zero variance; NRMSE is undefined")]
    DegenerateTarget,

    #[error("division guard: c = 0 and the regressor is identically zero")]
    DivisionGuard,

    #[error("construction stalled after {anneals} r-anneals at block {block}")]
    ConstructionStalled { block: usize, anneals: usize },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            Error::Parse { .. } | Error::Format { .. } | Error::Io { .. } | Error::Json(_) => 3,
            Error::NumericFailure { .. } | Error::DegenerateTarget | Error::DivisionGuard => 4,
            Error::ConstructionStalled { .. } => 5,
        }
    }
}
