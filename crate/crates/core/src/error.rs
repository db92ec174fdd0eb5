use std::io;

use thiserror::Error;

/// Errors produced anywhere in the encode/decode pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (bad argument, empty input).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("truncated stream: {0}")]
    TruncatedStream(String),

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("bad magic: expected \"LCP1\", found {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    /// A scaled measurement does not fit the signed 16-bit range.
    #[error("value {value} on channel {channel} scales to {scaled}, outside [-32768, 32767]")]
    OutOfRange {
        channel: String,
        value: f64,
        scaled: f64,
    },

    /// A CSV cell or row could not be parsed. Row and column are 1-based.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: u64,
        column: usize,
        message: String,
    },

    /// Decoded output differs from the encoder input.
    #[error(
        "roundtrip mismatch at row {row}, column {column}: expected {expected}, decoded {actual}"
    )]
    Mismatch {
        row: u64,
        column: usize,
        expected: i64,
        actual: i64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn truncated(msg: impl Into<String>) -> Self {
        Error::TruncatedStream(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptStream(msg.into())
    }

    /// Process exit code used by the `lcp` binary. Each variant maps to a
    /// distinct nonzero code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Io(_) => 3,
            Error::Parse { .. } => 4,
            Error::OutOfRange { .. } => 5,
            Error::BadMagic(_) => 6,
            Error::UnsupportedVersion(_) => 7,
            Error::TruncatedStream(_) => 8,
            Error::CorruptStream(_) => 9,
            Error::Mismatch { .. } => 10,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
