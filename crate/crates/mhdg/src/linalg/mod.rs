//! Sparse matrix storage, a direct LU solver with partial pivoting and a
//! minimum-degree fill-reducing ordering, an inverse-power-iteration
//! eigenvalue estimate, and a MatrixMarket dump.
//!
//! The coupled DG/HDG systems are unsymmetric twofold saddle points at
//! desk scale (≤ ~2·10⁵ unknowns); a deterministic direct solver is both
//! adequate and reproducible. Everything here is single-threaded and
//! bitwise-deterministic for identical inputs.

mod csr;
mod eigen;
mod lu;
mod mm;

pub use csr::{to_csr, CsrMatrix, TripletBuffer};
pub use eigen::smallest_eigenvalue_spd;
pub use lu::{factorize, DirectFactorization};
pub use mm::write_matrix_market;
