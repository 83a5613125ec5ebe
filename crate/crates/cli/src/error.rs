use cogh_harness::HarnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::NotFound(_) => 2,
            CliError::Data(_) => 65,
            CliError::Internal(_) => 70,
        }
    }
}

impl From<cogh_core::Error> for CliError {
    fn from(e: cogh_core::Error) -> Self {
        use cogh_core::Error as E;
        let msg = e.to_string();
        match e {
            E::NotFound(_) => CliError::NotFound(msg),
            E::InvalidArgument(_) | E::UnsupportedGame(_) => CliError::Usage(msg),
            E::DataValidation(_) | E::Parse { .. } => CliError::Data(msg),
            E::OptimizationFailure(_) => CliError::Internal(msg),
            E::Io(io) => io.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::NotFound(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Core(c) => c.into(),
            HarnessError::Io(io) => io.into(),
            HarnessError::Config(_) | HarnessError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            HarnessError::Template(_) | HarnessError::ParseFailure { .. } => CliError::Data(e.to_string()),
            HarnessError::Endpoint(_) | HarnessError::MatchAborted { .. } => CliError::Internal(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
