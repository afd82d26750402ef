use thiserror::Error;

/// Errors raised across the toolkit.
///
/// `Validation` covers malformed input (bad parameters, files, knob ranges);
/// `Numeric` covers quality failures of an otherwise well-posed computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero wave vector has no canonical class")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("derivative order {0} not supported (max 4)")]
    DerivativeOrder(usize),
    #[error("potential file: {0}")]
    Format(String),
    #[error("enumeration budget exceeded: {count} vectors (budget {budget})")]
    Budget { count: u64, budget: u64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for failures of numeric quality rather than of input validity.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
