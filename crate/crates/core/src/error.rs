use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the saliency pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("zero-sized image")]
    ZeroSizedImage,

    #[error("zero target dimension {width}x{height}")]
    ZeroDimension { width: usize, height: usize },

    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel {kernel}x{kernel} larger than plane {width}x{height}")]
    KernelTooLarge {
        kernel: usize,
        width: usize,
        height: usize,
    },

    #[error("value {value} outside [0, 1] at index {index}")]
    ValueOutOfRange { value: f64, index: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("network: {0}")]
    Network(String),

    #[error("expected channels {expected}, found {found}")]
    WrongChannelSet { expected: String, found: String },

    #[error("zero-sum map")]
    ZeroSumMap,

    #[error("degenerate map (zero variance)")]
    DegenerateMap,

    #[error("no fixations")]
    NoFixations,

    #[error("zero fixations in {0}")]
    ZeroFixations(PathBuf),

    #[error("missing dataset subdirectory {0}")]
    MissingSubdirectory(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
