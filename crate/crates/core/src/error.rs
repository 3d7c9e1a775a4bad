use thiserror::Error;

/// Errors raised by the geometry, estimation and hybrid-model routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside (or on the boundary of) the domain it must belong to.
    #[error("domain error in `{argument}`: {reason}")]
    Domain {
        argument: &'static str,
        reason: String,
    },

    #[error("dimension mismatch in `{argument}`: expected {expected}, got {got}")]
    Dimension {
        argument: &'static str,
        expected: usize,
        got: usize,
    },

    /// The supremum defining a Legendre dual is not attained inside the domain.
    #[error("Legendre dual unbounded at the requested point: {0}")]
    UnboundedDual(String),

    /// An iterative solver hit its iteration cap; `best` is the best iterate seen.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset is empty")]
    EmptyData,

    /// The ML mean falls on the boundary of the mean space.
    #[error("mean {mean:?} lies on the boundary of the mean space; use MAP with an interior prior")]
    Boundary { mean: Vec<f64> },

    #[error("invalid hyperparameters: {0}")]
    Hyperparam(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(argument: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            argument,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_dim(argument: &'static str, expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension {
                argument,
                expected,
                got,
            })
        }
    }

    /// True for errors caused by solver non-convergence rather than bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
