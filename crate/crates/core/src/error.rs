use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("invalid slotting: {0}")]
    InvalidSlotting(String),

    #[error("vocabulary is empty (min_count = {min_count})")]
    EmptyVocabulary { min_count: u64 },

    #[error("unknown word: {0:?}")]
    UnknownWord(String),

    #[error("slot index {slot} out of range ({slots} slots)")]
    UnknownSlot { slot: usize, slots: usize },

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("cosine similarity undefined for a zero-norm vector")]
    ZeroNorm,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid PCA request: {0}")]
    InvalidPca(String),

    #[error("not a model file (bad magic)")]
    NotAModelFile,

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite value detected: {0}")]
    NonFinite(String),

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSynthSpec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
