use uulab_core::io::IoError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: IoError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            _ => 3,
        }
    }

    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CliError::Validation(msg.to_string())
    }

    pub fn compute(msg: impl std::fmt::Display) -> Self {
        CliError::Compute(msg.to_string())
    }
}

pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, std::io::Error> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Io { context: what.into(), source })
    }
}

impl<T> Context<T> for Result<T, IoError> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Csv { context: what.into(), source })
    }
}
