use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector norm {0} is not within tolerance of 1")]
    NotUnitNorm(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("query budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("oracle mode error: {0}")]
    ModeError(String),

    #[error("flip probability {0} is not below 1/2; majority voting cannot recover labels")]
    NoiseTooHigh(f64),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
