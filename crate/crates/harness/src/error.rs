use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] wks_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed trace file {path}, line {line}: {reason}")]
    Format {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("property suite failed: {0}")]
    SuiteFailed(String),
}

impl HarnessError {
    /// Process exit code: 1 validation, 2 property failure, 3 budget exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(wks_core::Error::BudgetExceeded { .. }) => 3,
            HarnessError::SuiteFailed(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
