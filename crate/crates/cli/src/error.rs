use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::OracleMismatch(_) => 3,
        }
    }
}

impl From<immunolearn_core::Error> for CliError {
    fn from(e: immunolearn_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
