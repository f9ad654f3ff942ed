use thiserror::Error;

/// Errors produced by the coherent-state toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("operation requires algebra kind {expected}, got {actual}")]
    WrongKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("kind mismatch: cannot combine {0} with {1}")]
    KindMismatch(&'static str, &'static str),

    #[error("amplitude outside the admissible domain: {0}")]
    OutOfDomain(String),

    #[error("truncation too small: tail weight {tail:e} exceeds {limit:e}; need dimension >= {required}")]
    TruncationTooSmall {
        tail: f64,
        limit: f64,
        required: usize,
    },

    #[error("split constraint violated: {0}")]
    SplitConstraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
