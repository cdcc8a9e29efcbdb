//! Discontinuous Galerkin and hybridizable DG solvers for the stationary
//! incompressible magnetohydrodynamics system
//!
//! ```text
//!   -ν Δu + (u·∇)u + ∇p - κ (∇×b)×b = f,     ∇·u = 0,
//!   κν_m ∇×(∇×b) + ∇r - κ ∇×(u×b) = g,      ∇·b = 0,
//! ```
//!
//! on a Lipschitz polyhedron, with velocity `u`, pressure `p`, magnetic
//! field `b`, and magnetic pseudo-pressure `r` (the multiplier enforcing
//! `∇·b = 0`; `r = 0` for the exact solution). Two sets of magnetic
//! boundary conditions are supported alongside the no-slip condition
//! `u = 0`:
//!
//! * **type 1** (perfectly conducting wall): `n×b = 0` and `r = 0` on `∂Ω`;
//! * **type 2**: `b·n = 0` and `n×(∇×b) = 0` on `∂Ω`, with `∫r = 0`.
//!
//! Two discretizations are provided:
//!
//! * [`dg_mhd`]: a mixed interior-penalty DG method on tetrahedra with
//!   upwinded convection, where the convecting velocity is post-processed
//!   into an exactly divergence-free H(div) field ([`dg_mhd::postprocess_velocity`]);
//! * [`hdg_mhd`]: a hybridizable DG method (type-1 boundary conditions)
//!   whose velocity is exactly divergence-free element by element, solved
//!   via static condensation onto face traces.
//!
//! Both methods linearize the nonlinear system by Picard (fixed-point)
//! iteration. [`verify`] provides manufactured solutions with forcing terms
//! generated by forward-mode automatic differentiation, error norms,
//! convergence studies, and numerical diagnostics for the structural
//! properties the analysis of the methods rests on (coercivity, discrete
//! embedding, upwind positivity, divergence-free postprocessing).
//!
//! The [`cli`] module exposes all of this as a small command-line tool; the
//! crate's `examples/` directory shows the library API for each major
//! capability.

pub mod error;
pub mod fem_core;
pub mod linalg;
pub mod mesh;

pub mod dg_mhd;
pub mod hdg_mhd;
pub mod verify;

pub mod cli;

pub use error::Error;

/// Magnetic boundary-condition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BcType {
    /// Perfectly conducting wall: `n×b = 0`, `r = 0` on `∂Ω`.
    Type1,
    /// `b·n = 0`, `n×(∇×b) = 0` on `∂Ω`, `∫r = 0`.
    Type2,
}

impl BcType {
    /// `true` when the curl–curl and pseudo-pressure face sums run over
    /// interior faces only (type 2); type 1 includes boundary faces.
    pub fn interior_faces_only(self) -> bool {
        matches!(self, BcType::Type2)
    }
}

impl std::fmt::Display for BcType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BcType::Type1 => write!(f, "1"),
            BcType::Type2 => write!(f, "2"),
        }
    }
}

/// Physical parameters of the MHD system.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Params {
    /// Fluid viscosity `ν > 0`.
    pub nu: f64,
    /// Magnetic diffusivity `ν_m > 0`.
    pub nu_m: f64,
    /// Coupling coefficient `κ > 0`.
    pub kappa: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { nu: 1.0, nu_m: 1.0, kappa: 1.0 }
    }
}

/// Penalty and stabilization parameters of the DG scheme.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Penalties {
    /// Velocity interior-penalty coefficient `a₀`.
    pub a0: f64,
    /// Magnetic interior-penalty coefficient `m₀`.
    pub m0: f64,
    /// Pseudo-pressure jump coefficient `s₀`.
    pub s0: f64,
}

impl Penalties {
    /// Default penalties for polynomial degree `k`: `a₀ = m₀ = 10(k+1)²`,
    /// `s₀ = 1`.
    pub fn for_degree(k: usize) -> Self {
        let c = 10.0 * ((k + 1) * (k + 1)) as f64;
        Penalties { a0: c, m0: c, s0: 1.0 }
    }
}
