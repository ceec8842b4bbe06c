//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the construction is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Branches of a unimodal map disagree at the turning point.
    #[error("continuity error at turning point: |f+(c) - f-(c)| = {gap:e}")]
    Continuity { gap: f64 },

    /// The model assumptions are violated (orbit leaves I, orbit hits c, ...).
    #[error("model violation: {0}")]
    Model(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// (I - zP) is singular on the supplied right-hand side.
    #[error("singular system: {0}")]
    Singular(String),

    /// A power series was evaluated outside its estimated disc of convergence.
    #[error("radius error: |z| = {modulus} exceeds estimated radius {radius}")]
    Radius { modulus: f64, radius: f64 },

    /// Input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            residual,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
