use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("eigenvalues {lower:e} and {upper:e} coincide within relative tolerance 1e-14")]
    DuplicateEigenvalue { lower: f64, upper: f64 },

    #[error("Vandermonde matrix is numerically singular (zero pivot)")]
    Singular,

    #[error("floating-point overflow in {what} at order {order}")]
    Overflow { what: &'static str, order: u32 },

    #[error("degenerate moments: mu(2) = {second:e} must exceed mu(1)^2 = {mean_squared:e}")]
    DegenerateMoments { second: f64, mean_squared: f64 },

    #[error("moment of order {0} is missing from the table")]
    MissingMoment(u32),

    #[error("{0} did not converge")]
    Convergence(&'static str),

    #[error("quadrature did not converge: estimate {estimate:e}, achieved error {achieved:e}")]
    Quadrature { estimate: f64, achieved: f64 },

    #[error("Hermitian eigensolver failed at realization {0}")]
    Eigensolver(usize),

    #[error("density evaluation invariant violated: {0}")]
    DensityInvariant(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
