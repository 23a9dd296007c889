use thiserror::Error;

/// Errors raised by the divergence toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("density not in L_alpha for alpha = {alpha}: {detail}")]
    NotInLAlpha { alpha: f64, detail: String },

    #[error("divergent power integral: gamma = {gamma} must exceed -1/(1+alpha) for alpha = {alpha}")]
    DivergentIntegral { gamma: f64, alpha: f64 },

    #[error("unsupported density pair: {0}")]
    UnsupportedPair(String),

    #[error(
        "quadrature did not converge after {panels} panels (estimate {estimate}, error estimate {error_estimate})"
    )]
    QuadratureFailure {
        estimate: f64,
        error_estimate: f64,
        panels: usize,
    },

    #[error("stored derivative {stored} disagrees with finite-difference estimate {estimate}")]
    DerivativeMismatch { stored: f64, estimate: f64 },

    #[error("indeterminate combination of infinite terms")]
    Indeterminate,

    #[error("objective is +inf on every initial probe of the bracket")]
    NoMinimum,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
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
