use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the domain [{lo}, {hi}] of {what}")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeo(String),

    #[error("singular integral: {0}")]
    SingularIntegral(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid bound setup: {0}")]
    Spec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
