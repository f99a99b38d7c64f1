use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An evaluation point fell outside the unit interval.
    #[error("{what} = {value} lies outside [0, 1]")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gram matrix is numerically singular (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    Conditioning { min_eig: f64, max_eig: f64 },

    /// The smallest singular value behind the ill-posedness estimate vanished,
    /// so the sieve dimension is infeasible for this sample size.
    #[error("ill-posedness estimate overflows at J = {j} (s_min = {s_min:e})")]
    IllposednessOverflow { j: usize, s_min: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("search range exhausted: {0}")]
    RangeExhausted(String),

    #[error("invalid model: {0}")]
    Construction(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Short stable tag for tables and logs.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidInput(_) => "invalid_input",
            Error::Conditioning { .. } => "conditioning",
            Error::IllposednessOverflow { .. } => "illposedness_overflow",
            Error::Resource(_) => "resource",
            Error::RangeExhausted(_) => "range_exhausted",
            Error::Construction(_) => "construction",
            Error::Numeric(_) => "numeric",
            Error::Config { .. } => "config",
        }
    }

    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::InvalidInput(_)
                | Error::Construction(_)
                | Error::Config { .. }
                | Error::Resource(_)
        )
    }
}
