use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("incompatible space roles: {0}")]
    Role(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bracket is not fiber-linear: residual {residual:.3e} exceeds {tol:.1e}")]
    NotLinear { residual: f64, tol: f64 },

    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),

    #[error("incoherent model family: {0}")]
    Family(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("non-finite state at step {step}")]
    Blowup { step: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
