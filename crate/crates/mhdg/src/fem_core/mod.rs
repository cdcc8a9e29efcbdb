//! Reference-element machinery shared by both discretizations: quadrature
//! rules, polynomial bases, degree-of-freedom layouts, L² projection,
//! forward-mode dual numbers, and conforming (continuous) subspaces used by
//! the verification diagnostics.

pub mod basis;
pub mod conforming;
pub mod dof;
pub mod dual;
pub mod fields;
pub mod quad;

pub use basis::{make_scalar_basis, BasisFamily, ScalarBasis, Shape};
pub use dof::{build_dof_layout, DgLayout, DofLayout, HdgLayout, SchemeKind, SpaceDims};
pub use dual::{seed_gradient, seed_hessian, Dual3, Scalar};
pub use fields::{l2_project, random_field, BasisSet, DgField};
pub use quad::{make_quadrature, QuadratureRule};
