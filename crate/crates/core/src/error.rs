use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("state {0} outside the open interval (0, 1)")]
    Domain(f64),
    #[error("radius {r} outside the hot shell [{inner}, {outer}]")]
    Shell { r: f64, inner: f64, outer: f64 },
    #[error("degenerate operating point: {0}")]
    Degenerate(&'static str),
    #[error("extremum not bracketed: {0}")]
    Resolution(&'static str),
    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NotFound { what: &'static str, lo: f64, hi: f64 },
    #[error("solver failed to converge: {0}")]
    Solver(&'static str),
    #[error("step size underflow at t = {t:e} s")]
    Stiffness { t: f64 },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("render: {0}")]
    Render(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is not `Clone`, so it is carried as text.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
