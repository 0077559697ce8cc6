use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A regression had too few usable points or a degenerate design.
    #[error("fit error: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
