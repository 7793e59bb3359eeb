use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no enabled actions")]
    NoEnabledActions,

    #[error("action `{action}` is not enabled in state `{state}`")]
    DisabledAction { state: String, action: String },

    #[error("invalid run configuration: {0}")]
    InvalidRun(String),

    #[error("predicate error: {0}")]
    Predicate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed episode log: {0}")]
    Log(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
