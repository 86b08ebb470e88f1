use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("{what} did not converge: {detail}")]
    NotConverged { what: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("path ended at level {reached} before crossing {target}")]
    HorizonExceeded { target: f64, reached: f64 },

    #[error("Laplace inversion inconsistent at t={t}: {a} vs {b}")]
    Inversion { t: f64, a: f64, b: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
