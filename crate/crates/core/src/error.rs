use thiserror::Error;

/// Errors raised across model construction, spectral analysis and dynamics.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested size exceeds one of the hard caps.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// A site or mode index is outside the chain.
    #[error("index out of range: {0}")]
    Index(String),
    /// Operand dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Scenario or run configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A function argument is outside its admissible domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An input fails a documented precondition (for example a non-stationary state).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The adaptive integrator could not make progress.
    #[error("integration failed: {0}")]
    Integration(String),
    /// A dense factorization failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by user-supplied configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Size(_) | Error::Index(_) | Error::Config(_) | Error::Argument(_) | Error::Shape(_)
        )
    }
}
