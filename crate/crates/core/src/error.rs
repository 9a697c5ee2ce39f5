use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: tx element {tx} and rx element {rx} coincide")]
    DegenerateGeometry { tx: usize, rx: usize },

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("ill-conditioned channel (condition number {condition_number:e})")]
    IllConditioned { condition_number: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }
}

/// Fails with [`SimError::InvalidInput`] unless `value` is finite.
pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SimError::invalid(format!("{name} must be finite, got {value}")))
    }
}
