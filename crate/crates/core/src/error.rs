use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no descent: {0}")]
    NoDescent(String),
    #[error("bracket failure: {0}")]
    Bracket(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("window too small: {found} nodes in fit window, need at least {needed}")]
    WindowTooSmall { found: usize, needed: usize },
    #[error("metric mismatch: {0}")]
    MetricMismatch(String),
    #[error("nonlinear iteration diverged after {0} iterations")]
    NonlinearDivergence(usize),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
