use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse grouping used by the CLI exit codes and the C ABI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Model,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed XML{}: {message}", source_hint(.file))]
    MalformedXml { file: Option<PathBuf>, message: String },
    #[error("author {author_id} has no <document> elements")]
    EmptyAuthor { author_id: String },
    #[error("invalid author id {0:?}: must be non-empty and alphanumeric")]
    InvalidAuthorId(String),
    #[error("duplicate author id {0}")]
    DuplicateAuthorId(String),
    #[error("truth file line {line}: {message}")]
    MalformedTruthLine { line: usize, message: String },
    #[error("truth file lists {0} but no {0}.xml exists")]
    MissingAuthorFile(String),
    #[error("author {0} is missing from the truth file")]
    UnlabeledAuthor(String),
    #[error("corpus is not fully labeled")]
    UnlabeledCorpus,
    #[error("corpus mixes labeled and unlabeled authors")]
    MixedLabeling,
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no terms survive vocabulary filtering")]
    EmptyVocabulary,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("training data contains a single class")]
    SingleClassInput,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("operation requires a {expected} model")]
    WrongModelKind { expected: &'static str },
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt model file: {0}")]
    CorruptModelFile(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn source_hint(file: &Option<PathBuf>) -> String {
    match file {
        Some(p) => format!(" in {}", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidConfig(_) => ErrorCategory::Usage,
            SingleClassInput
            | DimensionMismatch { .. }
            | WrongModelKind { .. }
            | UnsupportedVersion(_)
            | CorruptModelFile(_) => ErrorCategory::Model,
            _ => ErrorCategory::Data,
        }
    }
}
