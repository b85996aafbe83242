use thiserror::Error;

/// Failure classes of the command-line tool, one per exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A checked inequality or certificate failed.
    #[error("violation: {0}")]
    Violation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<meanzero_core::Error> for CliError {
    fn from(e: meanzero_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
