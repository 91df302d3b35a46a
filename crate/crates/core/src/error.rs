use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A probability or real argument outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed cache file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! invalid_arg {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(format!($($arg)*))
    };
}

pub(crate) use invalid_arg;
