use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("sample outside kernel domain: {0}")]
    Domain(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("no qualifying sample pair for spike at {location}")]
    Selection { location: f64 },
    #[error("structure condition violated: {0}")]
    Structure(String),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
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

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
