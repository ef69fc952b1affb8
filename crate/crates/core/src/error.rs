use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("degenerate channel: |w h| = {0:e}")]
    DegenerateChannel(f64),

    #[error("enumeration of {combinations} combinations exceeds cap {cap}")]
    EnumerationTooLarge { combinations: f64, cap: u64 },

    #[error("output error: {0}")]
    Output(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    Convergence { estimate: f64, error_bound: f64 },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}
