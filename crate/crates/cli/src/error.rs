use thiserror::Error;

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad configuration, or inputs that fail validation.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input, or an output that cannot be written.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<evcop_core::Error> for CliError {
    fn from(e: evcop_core::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn io(msg: impl Into<String>) -> CliError {
    CliError::Io(msg.into())
}
