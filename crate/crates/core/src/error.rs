//! Error types shared across the simulator.

use thiserror::Error;

/// Errors produced by simulator components.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or incompatible inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Round-level protocol violation (empty update set, length mismatch).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Numerical failure (singular system, non-finite value).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed input file.
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn parse(
        path: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: location.into(),
            message: message.into(),
        }
    }
}
