use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    /// Decay fitting failed; the raw `(t, displacement)` series is kept for inspection.
    #[error("fit error: {message}")]
    Fit {
        message: String,
        series: Vec<(f64, f64)>,
    },

    /// An iterative solve did not settle. `history` holds the energy trace of a
    /// relaxation or the Cauchy distance sequence of an exhaustion.
    #[error("convergence error: {message}")]
    Convergence { message: String, history: Vec<f64> },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidPoint(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
