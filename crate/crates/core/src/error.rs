use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dark state is degenerate: every odd-site coefficient vanishes")]
    DegenerateDarkState,

    #[error("symmetry mismatch: {left:?} vs {right:?}")]
    SymmetryMismatch {
        left: crate::Symmetry,
        right: crate::Symmetry,
    },

    #[error("sampler failure: acceptance rate {rate:.3e} after {trials} proposals")]
    SamplerFailure { rate: f64, trials: u64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("frame store {path:?}: {reason}")]
    FrameStore { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
