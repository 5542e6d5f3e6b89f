use std::path::PathBuf;

use thiserror::Error;

use crate::model::Language;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the clustering library.
///
/// Variants are split between bad input data (`is_input_error`) and bad
/// settings or models (`is_config_error`) so callers can map them to
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("invalid document {id:?}: {reason}")]
    InvalidDocument { id: String, reason: String },

    #[error("timestamp regression at line {line}: {timestamp} h is {behind} h behind the newest seen (slack {slack} h)")]
    TimestampRegression {
        line: usize,
        timestamp: f64,
        behind: f64,
        slack: f64,
    },

    #[error("empty corpus for language {0}")]
    EmptyCorpus(Language),

    #[error("language mismatch: document is {doc}, cluster is {cluster}")]
    LanguageMismatch { doc: Language, cluster: Language },

    #[error("subvector index {0} out of range (0..12)")]
    SubvectorOutOfRange(usize),

    #[error("embedding dimension mismatch: expected {expected}, found {found} (line {line})")]
    EmbeddingDimension {
        expected: usize,
        found: usize,
        line: usize,
    },

    #[error("document {doc_id:?} has no gold {kind} label")]
    Unlabeled { doc_id: String, kind: &'static str },

    #[error("no rankable pairs: every query needs at least one positive and one negative")]
    NoRankablePairs,

    #[error("no training examples")]
    NoExamples,

    #[error("partitions cover different ids: {0}")]
    IdMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported format version {found} in {what} (expected {expected})")]
    FormatVersion {
        what: String,
        found: u32,
        expected: u32,
    },

    #[error("annotator failed: {0}")]
    Annotator(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for problems in the data being processed.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Malformed { .. }
                | Error::DuplicateDocument(_)
                | Error::InvalidDocument { .. }
                | Error::TimestampRegression { .. }
                | Error::EmptyCorpus(_)
                | Error::EmbeddingDimension { .. }
                | Error::Unlabeled { .. }
                | Error::NoRankablePairs
                | Error::NoExamples
                | Error::IdMismatch(_)
                | Error::LanguageMismatch { .. }
        )
    }

    /// True for problems in settings, model files, or the annotator setup.
    pub fn is_config_error(&self) -> bool {
        !self.is_input_error()
    }
}
