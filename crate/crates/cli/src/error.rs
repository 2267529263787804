use nccover::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Numerical { context: String, source: Error },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { source, .. } if is_input_error(source) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// Module errors that reject the requested parameters rather than a computation.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_)
            | Error::InvalidGroup(_)
            | Error::GridTooCoarse { .. }
            | Error::NotCoprime { .. }
            | Error::ThetaIncompatible { .. }
            | Error::WindowTooSmall { .. }
            | Error::DimensionMismatch(_)
    )
}

/// Attaches the pipeline step to a module error.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for nccover::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { context: what.to_string(), source })
    }
}
