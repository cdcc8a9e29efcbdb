//! Mixed interior-penalty discretization of the stationary incompressible
//! MHD system.
//!
//! All four fields (velocity, pressure, magnetic field, magnetic
//! multiplier) are approximated in fully discontinuous piecewise
//! polynomials. The velocity block is a symmetric interior-penalty
//! Laplacian plus upwind convection; the magnetic block is a symmetric
//! interior-penalty curl–curl operator stabilized by a multiplier that is
//! itself penalized face-wise. The two boundary-condition families differ
//! only in whether the magnetic face sums include boundary faces.
//!
//! The nonlinear problem is solved by a fixed-point iteration in which the
//! convective velocity is first postprocessed into an exactly
//! divergence-free Raviart–Thomas field ([`postprocess`]), which is what
//! makes the convection operator dissipative without mesh conditions.

pub mod forms;
pub mod postprocess;
pub mod solver;
pub mod state;
pub mod tables;

pub use forms::{Advection, DgOps, UPWIND_TOL};
pub use postprocess::{postprocess_divfree, RtField, RtView};
pub use solver::{picard_solve, solve_linearized, DgSolution, PicardOptions, PicardReport};
pub use state::DgState;
pub use tables::{build_dg_tables, DgTables};
