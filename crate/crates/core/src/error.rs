use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A time or parameter fell outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested angle schedule cannot be realised by a finite drive.
    #[error("pulse design error at t = {t} us: {reason}")]
    Design { t: f64, reason: String },

    #[error("state is not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrator failure: norm drift {drift:.3e} exceeds tolerance; retry with {suggested_steps} steps")]
    Integrator { drift: f64, suggested_steps: usize },

    #[error("principal value did not converge: {0}")]
    PrincipalValue(String),

    #[error("unknown gate '{0}' (expected one of not, hadamard, s, t)")]
    UnknownGate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
