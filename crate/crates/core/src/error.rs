use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo={lo}, hi={hi}")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("upper bound {hi} exceeds the configured ceiling {ceiling}")]
    AboveCeiling { hi: u64, ceiling: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("primality bitmap covers [{lo}, {hi}) but [1, {needed}] is required")]
    BitmapCoverage { lo: u64, hi: u64, needed: u64 },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("only {achievable} of {requested} disjoint in-band blocks could be placed")]
    QuotaUnreachable { requested: usize, achievable: usize },

    #[error("block {block_id} anchored at ({col}, {row}) does not fit a {side}x{side} grid")]
    AnchorOutOfBounds {
        block_id: u32,
        col: usize,
        row: usize,
        side: usize,
    },

    #[error("requested {requested} blocks but only {available} are available")]
    SplitCounts { requested: usize, available: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("mismatched metric fields across runs")]
    MismatchedFields,

    #[error("unknown range preset `{0}`")]
    UnknownRange(String),

    #[error("{} prediction file(s) missing, first: {}", .0.len(), .0.first().map(|p| p.display().to_string()).unwrap_or_default())]
    MissingPredictions(Vec<PathBuf>),

    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }
}
