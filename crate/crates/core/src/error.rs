use crate::tube::TubeId;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tube {tube}: frame {frame} outside span [{start}, {end}]")]
    FrameOutOfRange {
        tube: TubeId,
        frame: i64,
        start: i64,
        end: i64,
    },

    #[error("tube {tube}, record {index}: {reason}")]
    InvalidTube {
        tube: TubeId,
        index: usize,
        reason: String,
    },

    #[error("duplicate tube id {0}")]
    DuplicateTube(TubeId),

    #[error("unknown tube id {0}")]
    UnknownTube(TubeId),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scene spec: {0}")]
    InvalidScene(String),

    #[error("instance too large for exhaustive search: {groups} groups (limit {limit})")]
    TooLarge { groups: usize, limit: usize },

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("placement out of bounds: {0}")]
    OutOfBounds(String),

    #[error("missing source frame {0}")]
    MissingSourceFrame(String),

    #[error("schedule references a different tube database (expected hash {expected}, found {found})")]
    StaleSchedule { expected: String, found: String },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the environment (filesystem, encoding) rather
    /// than of the inputs. CLI maps these to a distinct exit code.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::MissingSourceFrame(_))
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
