use std::path::PathBuf;

use mccdma_core::Error as CoreError;

pub type LabResult<T> = Result<T, LabError>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl LabError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 1 for anything that failed at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } | LabError::Parse { .. } => 2,
            LabError::Core(CoreError::Config { .. }) => 2,
            _ => 1,
        }
    }
}
