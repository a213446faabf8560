use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters, unusable topologies, invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called outside its domain (e.g. a node that is not a child of the PN).
    #[error("domain error: {0}")]
    Domain(String),

    /// A reference routine was asked to handle an instance larger than it supports.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Something that must never happen did: cycle in the transmission graph,
    /// broken budget balance, a MILP schedule that does not reconstruct.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("LP text, line {line}: {msg}")]
    LpParse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
