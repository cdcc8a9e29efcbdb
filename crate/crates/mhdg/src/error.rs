//! Crate-wide error type.

/// Errors produced by mesh I/O, linear algebra, and solver drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Mesh file could not be parsed or failed validation.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A matrix handed to the sparse factorization was numerically
    /// singular; the payload is the pivot (column) index at which
    /// elimination broke down.
    #[error("matrix is numerically singular at pivot {0}")]
    SingularMatrix(usize),

    /// Shape mismatch or structurally invalid sparse-matrix input.
    #[error("linear algebra error: {0}")]
    Linalg(String),

    /// Invalid configuration (unsupported degree, method/BC combination, …).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Nonlinear iteration failed to converge within the iteration budget.
    #[error("Picard iteration did not converge: {0}")]
    NoConvergence(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenient result alias.
pub type Result<T> = std::result::Result<T, Error>;
