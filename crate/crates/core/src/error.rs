use thiserror::Error;

/// Errors raised by the analysis pipeline.
///
/// Variants split into two families that the CLI maps onto distinct exit
/// codes: input validation problems and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),

    #[error("{source_name}:{line}: {message}")]
    Input {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:.6e})")]
    NotPositiveDefinite(f64),

    #[error("degenerate: no correlations")]
    DegenerateCorrelation,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error comes from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::NotSymmetric(_)
                | Error::DegenerateCorrelation
                | Error::Numerical(_)
        )
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
