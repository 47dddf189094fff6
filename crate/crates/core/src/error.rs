use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A chart constraint was violated (e.g. non-positive first coordinate
    /// on the affine half-plane) or a value left the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument was structurally invalid (wrong length, control outside
    /// the admissible range, truncation order out of bounds, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A stated precondition of an operation does not hold.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// A model failed its construction-time validation (automorphism checks,
    /// Jacobi identity of structure constants, ...).
    #[error("model error: {0}")]
    Model(String),

    /// Numerical failure: singular Jacobian, non-invertible differential, ...
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A resource guard tripped (enumeration blow-up, grid too fine).
    #[error("resource error: {0}")]
    Resource(String),

    /// A system description file could not be parsed or validated.
    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
