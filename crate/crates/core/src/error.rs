use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("no root for final-size relation: rhs {rhs} exceeds 1/e")]
    NoRoot { rhs: f64 },
    #[error("integration blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("tail not converged: I(T) = {last} >= {threshold}")]
    TailNotConverged { last: f64, threshold: f64 },
    #[error("kinetic solver diagnostic at t = {t}: {reason}")]
    KineticAbort { t: f64, reason: String },
    #[error("index undefined: {0}")]
    IndexUndefined(&'static str),
    #[error("too few usable points for fit: {0} (need 3)")]
    TooFewPoints(usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("epidemic not extinct by end of series (I = {0})")]
    NotExtinct(f64),
    #[error("malformed field dump: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { field, reason: reason.into() }
}
