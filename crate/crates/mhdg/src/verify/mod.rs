//! Verification harness: manufactured solutions, error norms, convergence
//! studies, and structural diagnostics.
//!
//! The manufactured-solution machinery ([`mms`]) produces divergence-free
//! velocity and magnetic fields satisfying either boundary-condition
//! family exactly, together with the body forces obtained by pushing the
//! fields through the continuous equations with dual-number automatic
//! differentiation. The remaining submodules measure discrete solutions
//! against those fields and probe the structural properties the schemes
//! are designed around (coercivity, divergence conformity, embedding
//! constants, pressure robustness).

pub mod mms;

pub use mms::{make_default_mms, MmsCase};
