use alloc::string::String;

/// Errors raised by the core algorithms and generators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A path-system or queue operation was applied to an object that does
    /// not satisfy its structural precondition.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("ambiguous instance: {0}")]
    Ambiguous(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}

macro_rules! structural {
    ($($arg:tt)*) => {
        $crate::error::Error::Structural(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid;
pub(crate) use structural;
