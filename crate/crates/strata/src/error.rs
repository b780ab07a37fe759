use std::path::PathBuf;

/// Crate-wide error type.
///
/// Variants are grouped by how a caller should react: `Config` means the
/// input description was malformed, `Contract` means an argument violated a
/// documented precondition, and the numeric variants mean a computation was
/// attempted but could not be completed to tolerance.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numeric routine failed: divergent quadrature, non-finite values,
    /// or an estimator that could not reach its target.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The request is well-formed but outside the implemented scope.
    #[error("unsupported scope: {0}")]
    Unsupported(String),

    /// A point was queried where the object is singular, e.g. a density
    /// evaluated off every carrier.
    #[error("singular point: {0}")]
    Singular(String),

    /// Rejection sampling gave up; reported with the observed acceptance rate.
    #[error("sampling failure: {0}")]
    Sampling(String),

    /// A measure or experiment description failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
