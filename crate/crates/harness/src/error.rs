use cogh_core::ActionLog;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("no action in 1..={n} found in response {response:?}")]
    ParseFailure { response: String, n: usize },
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("match aborted after {} rounds: {reason}", partial.records.len())]
    MatchAborted { reason: String, partial: Box<ActionLog> },
    #[error(transparent)]
    Core(#[from] cogh_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
