use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Values are carried as `f64` regardless of the scalar type used for the
/// computation that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} outside valid domain {domain}")]
    Domain { what: &'static str, value: f64, domain: String },

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("root not bracketed: {0}")]
    Bracketing(String),

    #[error("integration failed at t = {t_reached}: {reason}")]
    IntegrationFailure { t_reached: f64, reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: impl Into<f64>, domain: impl Into<String>) -> Error {
    Error::Domain { what, value: value.into(), domain: domain.into() }
}
