use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The evaluation point sits within the pole radius of a zero of some
    /// denominator factor.
    #[error("pole: {what} (distance {distance:.3e})")]
    Pole { what: String, distance: f64 },

    #[error("series did not converge: {0}")]
    Convergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn is_pole(&self) -> bool {
        matches!(self, Error::Pole { .. } | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
