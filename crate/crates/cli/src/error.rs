use std::fmt::Display;

use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

/// Tags a fallible step with the exit class its errors belong to.
pub trait Phase<T> {
    fn usage(self, context: &str) -> Result<T, CliError>;
    fn data(self, context: &str) -> Result<T, CliError>;
    fn compute(self, context: &str) -> Result<T, CliError>;
}

impl<T, E: Display> Phase<T> for Result<T, E> {
    fn usage(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Usage(format!("{context}: {e}")))
    }

    fn data(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Data(format!("{context}: {e}")))
    }

    fn compute(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Compute(format!("{context}: {e}")))
    }
}
