use thiserror::Error;

/// Errors raised by protocol operations outside the ledger.
///
/// Contract rejections are not errors in this sense: they surface as
/// reverted receipts (see [`crate::ledger::TxStatus`]).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("protocol aborted: {0}")]
    Protocol(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("decryption failed: checksum mismatch")]
    DecryptionFailed,
    #[error("watermark not detected")]
    WatermarkNotDetected,
    #[error("truncated path ends at an uncached node")]
    TruncationNotCached,
    #[error("duplicate identifier")]
    Duplicate,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
