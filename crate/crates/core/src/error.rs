use std::io;

/// Errors surfaced by the counting, statistics and I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid country code {0:?}")]
    InvalidCountry(String),

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    #[error("record {0:?} has no authors")]
    NoAuthors(String),

    #[error("unknown subject group {0:?}")]
    UnknownGroup(String),

    #[error("invalid subject scheme: {0}")]
    InvalidScheme(String),

    #[error("unexpected header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("undefined input: {0}")]
    Undefined(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("fixture {name} failed checksum: expected {expected}, found {found}")]
    Checksum {
        name: &'static str,
        expected: &'static str,
        found: String,
    },

    #[error("fixture {name}: {message}")]
    Fixture { name: &'static str, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
