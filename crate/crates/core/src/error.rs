use std::path::PathBuf;

use crate::record::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate id '{id}'")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: invalid record: {}", join_violations(.violations))]
    InvalidRecord {
        path: PathBuf,
        line: usize,
        violations: Vec<Violation>,
    },

    #[error("split manifest does not cover record id '{0}'")]
    MissingFromManifest(String),

    #[error("split manifest names unknown record id '{0}'")]
    UnknownRecordId(String),

    #[error("no relevance score for record '{0}'")]
    MissingRelevance(String),

    #[error("validity threshold must be in 1..=5, got {0}")]
    ThresholdOutOfRange(i64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature vector has {got} values, model expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("model checksum mismatch: file says {expected}, content hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("reports are not comparable: {0}")]
    Incomparable(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the data itself rather than by the
    /// environment or the caller's configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateId { .. }
                | Error::InvalidRecord { .. }
                | Error::MissingFromManifest(_)
                | Error::UnknownRecordId(_)
                | Error::MissingRelevance(_)
                | Error::Empty(_)
        )
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
