use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input has the wrong shape: mismatched dimensions, ragged tables, bad indices.
    #[error("structural error: {0}")]
    Structural(String),

    /// A defining invariant of the object does not hold; carries the measured residual.
    #[error("validation failed: {invariant} (residual {residual:.3e})")]
    Validation { invariant: String, residual: f64 },

    /// A constructed connection violates one of its defining postconditions.
    #[error("{connection} connection postcondition failed: {detail}")]
    Guard { connection: &'static str, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn validation(invariant: impl Into<String>, residual: f64) -> Self {
        Error::Validation {
            invariant: invariant.into(),
            residual,
        }
    }

    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Validation { .. } => "validation",
            Error::Guard { .. } => "guard",
            Error::Unsupported(_) => "unsupported",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
