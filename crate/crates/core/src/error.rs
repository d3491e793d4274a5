use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no feasible drive: {0}")]
    InfeasibleDrive(String),

    #[error("{what} linear system is numerically singular (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem {
        what: &'static str,
        pivot_ratio: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eigensolver `{solver}` did not converge after {iterations} iterations (residual norm {residual:.3e})")]
    EigenNotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("transition matrix element |n32| = {0:.3e} is too small to drive")]
    ZeroMatrixElement(f64),

    #[error("steady state is not unique: Liouvillian is singular (pivot ratio {0:.3e})")]
    SingularLiouvillian(f64),

    #[error("time evolution did not settle within {time:.3e} s (last relative change {change:.3e})")]
    NotSettled { time: f64, change: f64 },

    #[error("steady state failed the density-matrix checks: {0}")]
    Unphysical(String),

    #[error("probe Rabi frequency must be positive to define transmission")]
    ZeroProbe,

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Table { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than by a computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidGrid(_)
                | Error::UnknownStrategy { .. }
                | Error::Config(_)
                | Error::Table { .. }
        )
    }
}
