use alloc::string::String;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("truncation level not found: {0}")]
    Truncation(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no critical crossing in the scanned range: {0}")]
    Bracket(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
