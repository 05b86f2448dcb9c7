use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid game: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("invalid strategy: {}", .0.join("; "))]
    InvalidStrategy(Vec<String>),

    #[error("objective error: {0}")]
    Objective(String),

    #[error("game has no initial configuration")]
    MissingInit,

    #[error("operation requires a game without random configurations")]
    Stochastic,

    #[error("operation requires a game without Player-1 configurations")]
    NotMdp,

    #[error("enumeration cap exceeded: {0}")]
    Cap(String),

    #[error("strategy verification failed: {0}")]
    Verification(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("epsilon must lie strictly between 0 and 1")]
    Epsilon,
}
