use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid metric parameter: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty ball family")]
    EmptyFamily,

    #[error("unsupported metric for this operation: {0}")]
    UnsupportedSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("validation failed: margin {margin:e} does not exceed threshold {threshold:e}")]
    ValidationFailed { margin: f64, threshold: f64 },

    #[error("resource limit exceeded after {nodes} search nodes")]
    ResourceLimit { nodes: u64 },

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
