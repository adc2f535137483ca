use thiserror::Error;

/// Errors raised by the sparse coding toolkit.
#[derive(Debug, Error)]
pub enum CscError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CscError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CscError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        CscError::Parse {
            offset,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CscError>;
