use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An index or argument is outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates a precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A pipeline stage received inconsistent intermediate results.
    #[error("orchestration error: {0}")]
    Orchestration(String),

    /// A dataset directory does not satisfy the expected layout.
    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
