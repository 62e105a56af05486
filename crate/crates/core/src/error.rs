use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("manifest row {row}: {message}")]
    Load { row: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("year {year} is outside the binning range [{first}, {last}]")]
    YearOutOfRange { year: i32, first: i32, last: i32 },

    #[error("invalid time binning: {0}")]
    Binning(String),

    #[error("class {label} has an empty sentence pool")]
    EmptyPool { label: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("class index {index} out of range for {n_classes} classes")]
    ClassOutOfRange { index: usize, n_classes: usize },

    #[error("cannot predict from a NaN score")]
    NanScore,

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("unsupported model file version {found} (this build reads version {supported})")]
    ModelVersion { found: u64, supported: u64 },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
