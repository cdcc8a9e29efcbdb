//! Degree-of-freedom layouts for the DG and HDG discretizations.
//!
//! DG global ordering: `[u | p | b | r | mean multipliers]`, element-major
//! and component-major inside each block, with modal (orthonormal) local
//! bases throughout. The mean-zero constraints on the pressure (always)
//! and on the type-2 pseudo-pressure are enforced by one appended Lagrange
//! multiplier row/column each, not by constrained bases.
//!
//! HDG: element-local unknowns `[L | u | p⊥ | b | w | r | λ]` are
//! condensed out per element; the global (condensed) system orders
//! `[per-interior-face traces (û, b̂ᵗ, r̂) | p̄ per element | mean
//! multiplier]`. Boundary traces are identically zero and carry no dofs.

use crate::error::{Error, Result};
use crate::fem_core::basis::space_dim;
use crate::fem_core::quad::Shape;
use crate::mesh::TetMesh;
use crate::BcType;

/// Dimensions of the local polynomial spaces for a given degree `k`.
#[derive(Debug, Clone, Copy)]
pub struct SpaceDims {
    /// dim P_k(tet).
    pub m_k: usize,
    /// dim P_{k−1}(tet).
    pub m_km1: usize,
    /// dim P_{k+1}(tet).
    pub m_kp1: usize,
    /// dim P_k(tri).
    pub m_f: usize,
    /// dim P_{k+1}(tri).
    pub m_fp1: usize,
}

impl SpaceDims {
    /// Space dimensions at degree `k ≥ 1`.
    pub fn new(k: usize) -> Self {
        SpaceDims {
            m_k: space_dim(Shape::Tet, k),
            m_km1: space_dim(Shape::Tet, k - 1),
            m_kp1: space_dim(Shape::Tet, k + 1),
            m_f: space_dim(Shape::Tri, k),
            m_fp1: space_dim(Shape::Tri, k + 1),
        }
    }
}

/// Global dof layout of the mixed DG scheme.
#[derive(Debug, Clone)]
pub struct DgLayout {
    /// Polynomial degree of the velocity/magnetic spaces.
    pub k: usize,
    /// Boundary-condition family.
    pub bc: BcType,
    /// Number of mesh elements.
    pub n_elems: usize,
    /// Local space dimensions.
    pub dims: SpaceDims,
    /// Offsets of the four field blocks and the multiplier block.
    pub off_u: usize,
    /// Pressure block offset.
    pub off_p: usize,
    /// Magnetic block offset.
    pub off_b: usize,
    /// Pseudo-pressure block offset.
    pub off_r: usize,
    /// First multiplier index (pressure mean).
    pub off_mult: usize,
    /// 1 (pressure mean) or 2 (+ type-2 pseudo-pressure mean).
    pub n_mult: usize,
    /// Total system dimension including multipliers.
    pub total: usize,
}

impl DgLayout {
    /// Velocity dof: element `e`, component `c`, local mode `m`.
    #[inline]
    pub fn u_dof(&self, e: usize, c: usize, m: usize) -> usize {
        self.off_u + (e * 3 + c) * self.dims.m_k + m
    }

    /// Pressure dof: element `e`, local mode `m` (degree k−1).
    #[inline]
    pub fn p_dof(&self, e: usize, m: usize) -> usize {
        self.off_p + e * self.dims.m_km1 + m
    }

    /// Magnetic dof: element `e`, component `c`, local mode `m`.
    #[inline]
    pub fn b_dof(&self, e: usize, c: usize, m: usize) -> usize {
        self.off_b + (e * 3 + c) * self.dims.m_k + m
    }

    /// Pseudo-pressure dof: element `e`, local mode `m` (degree k+1).
    #[inline]
    pub fn r_dof(&self, e: usize, m: usize) -> usize {
        self.off_r + e * self.dims.m_kp1 + m
    }

    /// Pressure-mean multiplier index.
    #[inline]
    pub fn mu_p(&self) -> usize {
        self.off_mult
    }

    /// Pseudo-pressure-mean multiplier index (type 2 only).
    #[inline]
    pub fn mu_r(&self) -> Option<usize> {
        (self.n_mult == 2).then_some(self.off_mult + 1)
    }

    /// Dimension of V_h (velocity dofs).
    pub fn dim_v(&self) -> usize {
        3 * self.n_elems * self.dims.m_k
    }

    /// Dimension of Q_h before the mean constraint.
    pub fn dim_q(&self) -> usize {
        self.n_elems * self.dims.m_km1
    }

    /// Dimension of C_h (magnetic dofs).
    pub fn dim_c(&self) -> usize {
        3 * self.n_elems * self.dims.m_k
    }

    /// Dimension of S_h (pseudo-pressure dofs).
    pub fn dim_s(&self) -> usize {
        self.n_elems * self.dims.m_kp1
    }
}

/// Global dof layout of the HDG scheme (type-1 boundary conditions).
#[derive(Debug, Clone)]
pub struct HdgLayout {
    /// Polynomial degree.
    pub k: usize,
    /// Number of mesh elements.
    pub n_elems: usize,
    /// Local space dimensions.
    pub dims: SpaceDims,
    /// Ids of the interior faces, in mesh face order; the trace blocks are
    /// laid out in this order.
    pub interior_faces: Vec<usize>,
    /// face id → index into `interior_faces` (None for boundary faces).
    pub iface_index: Vec<Option<usize>>,

    /// Element-local offsets within one local block `[L|u|p⊥|b|w|r|λ]`.
    pub loc_l: usize,
    /// Velocity offset in the local block.
    pub loc_u: usize,
    /// Mean-free pressure offset (block may be empty at k = 1).
    pub loc_p: usize,
    /// Magnetic offset.
    pub loc_b: usize,
    /// Curl variable offset.
    pub loc_w: usize,
    /// Pseudo-pressure offset.
    pub loc_r: usize,
    /// Normal-trace multiplier offset (4 faces × dim P_k(tri)).
    pub loc_lam: usize,
    /// Total local block size per element.
    pub n_local: usize,

    /// Per-interior-face trace block size: û (3·m_f) + b̂ᵗ (2·m_f) + r̂.
    pub per_face: usize,
    /// Offset of the element-mean pressures p̄ in the condensed system.
    pub off_pbar: usize,
    /// Offset of the single pressure-mean multiplier.
    pub off_mu: usize,
    /// Condensed (trace) system dimension.
    pub total: usize,
}

impl HdgLayout {
    /// Offset of interior face `idx`'s trace block.
    #[inline]
    pub fn face_block(&self, idx: usize) -> usize {
        idx * self.per_face
    }

    /// û dof within the condensed system: interior face `idx`, component
    /// `c`, face mode `m`.
    #[inline]
    pub fn uhat_dof(&self, idx: usize, c: usize, m: usize) -> usize {
        self.face_block(idx) + c * self.dims.m_f + m
    }

    /// Tangential-trace dof: interior face `idx`, tangent direction
    /// `t ∈ {0, 1}` (face frame), face mode `m`.
    #[inline]
    pub fn bhat_dof(&self, idx: usize, t: usize, m: usize) -> usize {
        self.face_block(idx) + (3 + t) * self.dims.m_f + m
    }

    /// Pseudo-pressure trace dof: interior face `idx`, face mode `m`
    /// (degree k+1).
    #[inline]
    pub fn rhat_dof(&self, idx: usize, m: usize) -> usize {
        self.face_block(idx) + 5 * self.dims.m_f + m
    }

    /// Element-mean pressure dof of element `e`.
    #[inline]
    pub fn pbar_dof(&self, e: usize) -> usize {
        self.off_pbar + e
    }

    /// Dimension of the trace space M_h (vector P_k per interior face).
    pub fn dim_m(&self) -> usize {
        3 * self.dims.m_f * self.interior_faces.len()
    }

    /// Dimension of M_hᵀ (tangential traces).
    pub fn dim_mt(&self) -> usize {
        2 * self.dims.m_f * self.interior_faces.len()
    }

    /// Dimension of N_h (scalar P_{k+1} per interior face).
    pub fn dim_n(&self) -> usize {
        self.dims.m_fp1 * self.interior_faces.len()
    }

    /// Dimension of Λ_h in scalars (one block per element-face pair).
    pub fn dim_lambda(&self) -> usize {
        4 * self.dims.m_f * self.n_elems
    }

    /// Dimension of the monolithic (uncondensed) system: all local blocks
    /// plus the condensed unknowns.
    pub fn dim_monolithic(&self) -> usize {
        self.n_elems * self.n_local + self.total
    }
}

/// Layout for either scheme.
#[derive(Debug, Clone)]
pub enum DofLayout {
    /// Mixed DG layout.
    Dg(DgLayout),
    /// Hybridized layout.
    Hdg(HdgLayout),
}

/// Scheme selector for [`build_dof_layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Mixed interior-penalty DG.
    Dg,
    /// Divergence-free HDG.
    Hdg,
}

/// Build the dof layout for a mesh, degree, scheme, and BC family.
/// Degree 0 is rejected (the methods need k ≥ 1); the degree cap is 4.
pub fn build_dof_layout(
    mesh: &TetMesh,
    k: usize,
    scheme: SchemeKind,
    bc: BcType,
) -> Result<DofLayout> {
    if k == 0 {
        return Err(Error::Config("polynomial degree k = 0 is not supported (k ≥ 1)".into()));
    }
    if k > 4 {
        return Err(Error::Config(format!("polynomial degree k = {k} exceeds the cap 4")));
    }
    let dims = SpaceDims::new(k);
    let ne = mesh.n_elems();
    match scheme {
        SchemeKind::Dg => {
            let nu = 3 * ne * dims.m_k;
            let np = ne * dims.m_km1;
            let nb = 3 * ne * dims.m_k;
            let nr = ne * dims.m_kp1;
            let n_mult = match bc {
                BcType::Type1 => 1,
                BcType::Type2 => 2,
            };
            let off_u = 0;
            let off_p = nu;
            let off_b = off_p + np;
            let off_r = off_b + nb;
            let off_mult = off_r + nr;
            Ok(DofLayout::Dg(DgLayout {
                k,
                bc,
                n_elems: ne,
                dims,
                off_u,
                off_p,
                off_b,
                off_r,
                off_mult,
                n_mult,
                total: off_mult + n_mult,
            }))
        }
        SchemeKind::Hdg => {
            if bc == BcType::Type2 {
                return Err(Error::Config(
                    "the HDG scheme supports only type-1 magnetic boundary conditions".into(),
                ));
            }
            let interior_faces: Vec<usize> = (0..mesh.faces.len())
                .filter(|&f| !mesh.faces[f].is_boundary())
                .collect();
            let mut iface_index = vec![None; mesh.faces.len()];
            for (i, &f) in interior_faces.iter().enumerate() {
                iface_index[f] = Some(i);
            }
            let loc_l = 0;
            let loc_u = 9 * dims.m_k;
            let loc_p = loc_u + 3 * dims.m_k;
            let loc_b = loc_p + (dims.m_km1 - 1); // mean-free pressure modes
            let loc_w = loc_b + 3 * dims.m_k;
            let loc_r = loc_w + 3 * dims.m_k;
            let loc_lam = loc_r + dims.m_kp1;
            let n_local = loc_lam + 4 * dims.m_f;
            let per_face = 5 * dims.m_f + dims.m_fp1;
            let off_pbar = per_face * interior_faces.len();
            let off_mu = off_pbar + ne;
            Ok(DofLayout::Hdg(HdgLayout {
                k,
                n_elems: ne,
                dims,
                interior_faces,
                iface_index,
                loc_l,
                loc_u,
                loc_p,
                loc_b,
                loc_w,
                loc_r,
                loc_lam,
                n_local,
                per_face,
                off_pbar,
                off_mu,
                total: off_mu + 1,
            }))
        }
    }
}
