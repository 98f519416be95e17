use thiserror::Error;

/// Errors produced by the ranking core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CareError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("augmented design is rank deficient: rank {rank}, need {required}")]
    DegenerateDesign { rank: usize, required: usize },

    #[error("covariate column {column} is constant and cannot be standardized")]
    DegenerateColumn { column: usize },

    #[error("comparison graph is disconnected ({} components)", components.len())]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("contrast has no component in the identifiable subspace")]
    DegenerateContrast,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CareError {
    fn from(err: std::io::Error) -> Self {
        CareError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CareError>;
