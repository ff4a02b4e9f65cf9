use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("unstable dynamics: spectral radius {0} >= 1")]
    Unstable(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),
    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
