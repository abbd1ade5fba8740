use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layer {layer}: {msg}")]
    Shape { layer: usize, msg: String },

    #[error("manifest: {context}: {msg}")]
    Parse { context: String, msg: String },

    #[error("weights: {0}")]
    Weights(String),

    #[error("weights: size mismatch: expected {expected} bytes, got {actual}")]
    WeightSize { expected: usize, actual: usize },

    #[error("layer {layer} is unmappable: {msg}")]
    Unmappable { layer: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("missing source value for {0}")]
    MissingSource(String),

    #[error("config: {0}")]
    Config(String),

    #[error("artifact {path}: {msg}")]
    Artifact { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
