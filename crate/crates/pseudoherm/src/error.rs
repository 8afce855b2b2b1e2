use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("degenerate plane: input vectors are linearly dependent")]
    DegeneratePlane,
    #[error("inconsistent model: {name} residual {residual:e} exceeds {limit:e}")]
    InconsistentModel { name: String, residual: f64, limit: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("conjugate interval: {0}")]
    ConjugateInterval(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("invalid model id: {0}")]
    InvalidModelId(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

impl From<csv::Error> for GeomError {
    fn from(e: csv::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GeomError {
    fn from(e: serde_json::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}
