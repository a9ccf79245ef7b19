//! Error type shared by the whole pipeline.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by pipeline operations and file loaders.
///
/// The stable message fragments ("insufficient correspondences",
/// "degenerate configuration", "schema violation", ...) are part of the
/// CLI contract: scripts may match on them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("insufficient correspondences: need at least 3, got {0}")]
    InsufficientCorrespondences(usize),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("empty box set")]
    EmptyBoxSet,

    #[error("invalid threshold parameter: {0}")]
    InvalidThresholdParameter(String),

    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("no ground-truth targets")]
    NoGroundTruthTargets,

    #[error("scene too crowded: gave up placing object {object} after {attempts} attempts")]
    SceneTooCrowded { object: usize, attempts: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
