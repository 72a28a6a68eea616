use thiserror::Error;

/// Errors raised while configuring or running a solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent user configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A configuration that is valid in principle but not supported.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    /// Array or matrix dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A numerical safeguard was violated (non-finite values, failed factorisation, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Unsupported(_) | Error::Shape(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
