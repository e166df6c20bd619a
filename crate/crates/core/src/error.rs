use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the recognition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: parse error at {location}: {message}")]
    Format {
        path: String,
        location: String,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate face {0}")]
    DegenerateFace(usize),

    #[error("degenerate input: points span only {dimension} dimension(s)")]
    Degenerate { dimension: usize },

    #[error("degenerate geometry: {0}")]
    Degeneracy(String),

    #[error("edge ({0}, {1}) is not classifiable: {2} incident face(s)")]
    NotClassifiable(usize, usize, usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model/dataset mismatch: {0}")]
    Mismatch(String),

    #[error("persistence error: {0}")]
    Persistence(String),

    #[error("unknown feature class {0}")]
    Registry(String),

    #[error("placement error: {0}")]
    Placement(String),

    #[error("split error: class {class} has {count} sample(s), at least 3 required")]
    Split { class: String, count: usize },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
