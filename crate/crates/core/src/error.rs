use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameters outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Profile evaluated where it is singular (r = 0 for unbounded kinds).
    #[error("singularity error: {0}")]
    Singularity(String),

    /// Adaptive quadrature failed to reach tolerance; carries the best
    /// estimate and its error bound.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// Time stepping produced an unusable state (NaN, large negative values).
    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    /// Malformed configuration or data file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Exit-code bucket used by the CLI: domain/parse problems are caller
    /// errors, everything else is a numerical failure.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Singularity(_) | Error::Parse(_)
        )
    }
}
