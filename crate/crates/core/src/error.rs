use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("fewer than 2 collections (found {0})")]
    TooFewCollections(usize),

    #[error("empty corpus after filtering")]
    EmptyCorpus,

    #[error("cannot build {folds} folds: collection `{collection}` has only {documents} documents")]
    NotEnoughDocuments {
        folds: usize,
        collection: String,
        documents: usize,
    },

    #[error("unknown collection `{0}`")]
    UnknownCollection(String),

    #[error("partition covers {partition} words but the corpus vocabulary has {vocabulary}")]
    PartitionMismatch { partition: usize, vocabulary: usize },

    #[error("corpus does not match model state: {0}")]
    CorpusMismatch(String),

    #[error("document is empty after out-of-vocabulary filtering")]
    EmptyDocument,

    #[error("word id {0} is not in the training vocabulary")]
    OutOfVocabulary(u32),

    #[error("no tokens to evaluate")]
    NoTokens,

    #[error("operation requires the entropy-based variant")]
    UnsupportedVariant,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported model file version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("model file checksum mismatch")]
    Checksum,

    #[error("model file is truncated")]
    Truncated,

    #[error("model file is invalid: {0}")]
    InvalidModelFile(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for usage or configuration errors, 2 for
    /// data errors, 3 for internal inconsistencies.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::UnsupportedVariant => 1,
            Error::PartitionMismatch { .. } | Error::CorpusMismatch(_) => 3,
            _ => 2,
        }
    }
}
