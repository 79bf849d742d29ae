use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A state or operator would leak weight above the Fock cutoff.
    #[error("truncation unsafe: {what} (tail weight {tail:.3e}, limit {limit:.1e})")]
    TruncationUnsafe { what: String, tail: f64, limit: f64 },

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerics failure: {0}")]
    NumericsFailure(String),

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("unsupported polynomial shape: {0}")]
    UnsupportedShape(String),

    #[error("proposal failure: {0}")]
    ProposalFailure(String),

    #[error("missing coverage: {0}")]
    MissingCoverage(String),

    #[error("too few shots: {0}")]
    InsufficientShots(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
