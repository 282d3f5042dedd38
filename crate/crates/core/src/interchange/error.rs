use std::path::PathBuf;

use thiserror::Error;

use super::config::Side;

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("invalid JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("{file} line {line}: {message}")]
    Tsv {
        file: String,
        line: usize,
        message: String,
    },

    #[error("malformed TextGrid header: {0}")]
    MalformedHeader(String),
    #[error("unsupported TextGrid variant: {0}")]
    UnsupportedTextGrid(String),
    #[error("TextGrid line {line}: {message}")]
    TextGridSyntax { line: usize, message: String },
    #[error("tier {tier:?} declares {declared} intervals but only {parsed} were found")]
    TruncatedTier {
        tier: String,
        declared: usize,
        parsed: usize,
    },
    #[error("tier {tier:?} interval {index} is not monotone")]
    NonMonotoneIntervals { tier: String, index: usize },

    #[error("PHEM: bad magic bytes")]
    BadMagic,
    #[error("PHEM: unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("PHEM: expected {expected} bytes, found {actual}")]
    TruncatedBinary { expected: usize, actual: usize },
    #[error("PHEM: {0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("row index has {index_rows} rows but the binary holds {binary_rows}")]
    RowCountMismatch {
        index_rows: usize,
        binary_rows: usize,
    },
    #[error("embedding dim {binary} does not match manifest dim {manifest}")]
    DimMismatch { manifest: usize, binary: usize },
    #[error("phone token {ordinal} of utterance {utterance_id} has no embedding row")]
    OrphanToken { utterance_id: String, ordinal: usize },
    #[error("row {row} points at {utterance_id}#{ordinal}, which is not a phone token")]
    UnknownRowTarget {
        row: usize,
        utterance_id: String,
        ordinal: usize,
    },
    #[error("rows {first} and {second} both map to {utterance_id}#{ordinal}")]
    DuplicateRow {
        first: usize,
        second: usize,
        utterance_id: String,
        ordinal: usize,
    },
    #[error("token references unknown speaker {0}")]
    UnknownSpeaker(String),
    #[error("utterance {utterance_id} has tokens from speakers {first} and {second}")]
    SharedUtterance {
        utterance_id: String,
        first: String,
        second: String,
    },

    #[error("feature {feature}: phone {phone:?} is in both classes")]
    OverlappingClasses { feature: String, phone: String },
    #[error("feature {feature}: {side} class is empty")]
    EmptyClass { feature: String, side: Side },
    #[error("unknown feature key {0:?}")]
    UnknownFeatureKey(String),
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = InterchangeError> = std::result::Result<T, E>;

impl InterchangeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            InterchangeError::MissingFile(path)
        } else {
            InterchangeError::Io { path, source }
        }
    }
}
