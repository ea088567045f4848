use alloc::string::String;

/// Errors raised by the coding layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Input buffers have the wrong length or shape.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The requested code configuration does not exist.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(alloc::format!($($arg)*))
    };
}

macro_rules! unsupported {
    ($($arg:tt)*) => {
        $crate::Error::Unsupported(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid;
pub(crate) use unsupported;
