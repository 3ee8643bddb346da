use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("difference/derivative order {order} exceeds the maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("difference operator consumed the whole frequency window along axis {axis}")]
    WindowConsumed { axis: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dense kernel needs {needed} entries, above the configured cap of {cap}")]
    MemoryCap { needed: usize, cap: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
