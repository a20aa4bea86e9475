use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no matching files in {dir} for pattern '{pattern}'")]
    NoMatchingFiles { dir: PathBuf, pattern: String },

    #[error("dimension mismatch at slice {slice} ({file}): expected {expected_w}x{expected_h}, found {found_w}x{found_h}")]
    SliceDimensionMismatch {
        slice: usize,
        file: PathBuf,
        expected_w: usize,
        expected_h: usize,
        found_w: usize,
        found_h: usize,
    },

    #[error("cannot decode {file}: {reason}")]
    Decode { file: PathBuf, reason: String },

    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("missing tile (row {row}, col {col}) for slice {slice}")]
    MissingTile { slice: usize, row: usize, col: usize },

    #[error("duplicate tile (row {row}, col {col}) for slice {slice}")]
    DuplicateTile { slice: usize, row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no pore voxels in volume")]
    NoPores,

    #[error("unknown pore id {0}")]
    UnknownPore(usize),

    #[error("key mismatch: {0}")]
    KeyMismatch(String),

    #[error("refusing to overwrite existing file {0} (use overwrite)")]
    WouldOverwrite(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid pattern: {0}")]
    Pattern(#[from] globset::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Error {
    let context = context.into();
    move |source| Error::Io { context, source }
}
