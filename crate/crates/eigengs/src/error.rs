use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Fewer than two usable images were found while loading a corpus.
    #[error("corpus at {dir}: found {found} usable image(s), need at least 2")]
    CorpusEmpty { dir: PathBuf, found: usize },

    #[error("expected {expected} channel(s), got {got}")]
    ChannelMismatch { expected: usize, got: usize },

    /// Requested more components than the data supports.
    #[error("rank error: {0}")]
    RankError(String),

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    /// Corrupt or inconsistent model file.
    #[error("model file: {0}")]
    ModelFormat(String),

    /// Invalid configuration or command-line usage.
    #[error("invalid arguments: {0}")]
    Usage(String),

    /// Batch step failures already reported on stderr.
    #[error("{0}")]
    Failed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("png {path}: {reason}")]
    Png { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
