//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the symbolic-regression toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input (bad indices, empty data,
    /// mismatched lengths, unparsable values).
    #[error("input error: {0}")]
    Input(String),

    /// Expression text that does not conform to the grammar. Reports a
    /// byte offset into the original string.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// A required upstream artifact (archive, model set, config) is missing
    /// or unreadable.
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// CSV decoding failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Convenience constructor for [`Error::Input`].
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Convenience constructor for [`Error::Parse`].
    pub fn parse(position: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: msg.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
