//! Piecewise-polynomial coefficient fields on a tetrahedral mesh.
//!
//! A [`DgField`] stores modal coefficients of an orthonormal reference
//! basis, element-major then component-major: `coeffs[(e·ncomp + c)·m + i]`.
//! Because the basis is orthonormal in the reference L² inner product and
//! the maps are affine, the physical element mass matrix is `detJ·I`, so
//! L² projection reduces to weighted sums of point values and the constant
//! Jacobian cancels from the coefficients.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::Result;
use crate::fem_core::basis::{make_scalar_basis, BasisFamily, ScalarBasis, MAX_BASIS_DEGREE};
use crate::fem_core::quad::{make_quadrature, Shape, MAX_DEGREE};
use crate::mesh::TetMesh;

/// Orthonormal reference bases for every degree up to a cap, built once
/// and shared by assembly, projection, and norm evaluation.
pub struct BasisSet {
    tet: Vec<ScalarBasis>,
    tri: Vec<ScalarBasis>,
}

impl BasisSet {
    /// Build tet and tri bases for all degrees `0..=max_degree`.
    pub fn new(max_degree: usize) -> Result<Self> {
        assert!(max_degree <= MAX_BASIS_DEGREE);
        let tet = (0..=max_degree)
            .map(|d| make_scalar_basis(Shape::Tet, d, BasisFamily::Orthonormal))
            .collect::<Result<Vec<_>>>()?;
        let tri = (0..=max_degree)
            .map(|d| make_scalar_basis(Shape::Tri, d, BasisFamily::Orthonormal))
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisSet { tet, tri })
    }

    /// Tet basis of degree `d`.
    pub fn tet(&self, d: usize) -> &ScalarBasis {
        &self.tet[d]
    }

    /// Tri basis of degree `d`.
    pub fn tri(&self, d: usize) -> &ScalarBasis {
        &self.tri[d]
    }

    /// Largest degree held.
    pub fn max_degree(&self) -> usize {
        self.tet.len() - 1
    }
}

/// Modal coefficients of an `ncomp`-component piecewise-P_degree field.
#[derive(Debug, Clone)]
pub struct DgField {
    /// Polynomial degree per element.
    pub degree: usize,
    /// Number of components (1 for scalars, 3 for vector fields).
    pub ncomp: usize,
    /// Number of elements.
    pub n_elems: usize,
    /// Modes per (element, component).
    pub n_modes: usize,
    /// Coefficients, `[(e·ncomp + c)·n_modes + i]`.
    pub coeffs: Vec<f64>,
}

impl DgField {
    /// All-zero field.
    pub fn zeros(degree: usize, ncomp: usize, n_elems: usize, n_modes: usize) -> Self {
        DgField { degree, ncomp, n_elems, n_modes, coeffs: vec![0.0; n_elems * ncomp * n_modes] }
    }

    /// Coefficient index of (element, component, mode).
    #[inline]
    pub fn idx(&self, e: usize, c: usize, m: usize) -> usize {
        (e * self.ncomp + c) * self.n_modes + m
    }

    /// Coefficient slice of one (element, component) pair.
    #[inline]
    pub fn comp(&self, e: usize, c: usize) -> &[f64] {
        let s = (e * self.ncomp + c) * self.n_modes;
        &self.coeffs[s..s + self.n_modes]
    }

    /// Mutable coefficient slice of one (element, component) pair.
    #[inline]
    pub fn comp_mut(&mut self, e: usize, c: usize) -> &mut [f64] {
        let s = (e * self.ncomp + c) * self.n_modes;
        &mut self.coeffs[s..s + self.n_modes]
    }

    /// Values at reference points of element `e`: `npts × ncomp`.
    /// `phi` must be the basis evaluation matrix at those points
    /// (`npts × n_modes`).
    pub fn eval_with_table(&self, e: usize, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let npts = phi.nrows();
        let mut out = DMatrix::zeros(npts, self.ncomp);
        for c in 0..self.ncomp {
            let coef = self.comp(e, c);
            for q in 0..npts {
                let mut v = 0.0;
                for (i, &ci) in coef.iter().enumerate() {
                    v += ci * phi[(q, i)];
                }
                out[(q, c)] = v;
            }
        }
        out
    }

    /// Values at arbitrary reference points of element `e`.
    pub fn eval(&self, e: usize, basis: &ScalarBasis, pts_ref: &[[f64; 3]]) -> DMatrix<f64> {
        self.eval_with_table(e, &basis.eval(pts_ref))
    }

    /// Physical-coordinate gradients at reference points: `out[d]` is
    /// `npts × ncomp` holding ∂(component)/∂x_d. `grad_ref` is the
    /// reference gradient table from [`ScalarBasis::eval_grad`];
    /// `inv_b` is the inverse element Jacobian.
    pub fn eval_grad_with_table(
        &self,
        e: usize,
        grad_ref: &[DMatrix<f64>; 3],
        inv_b: &[[f64; 3]; 3],
    ) -> [DMatrix<f64>; 3] {
        let npts = grad_ref[0].nrows();
        let mut out =
            [DMatrix::zeros(npts, self.ncomp), DMatrix::zeros(npts, self.ncomp), DMatrix::zeros(npts, self.ncomp)];
        for c in 0..self.ncomp {
            let coef = self.comp(e, c);
            for q in 0..npts {
                let mut gr = [0.0; 3];
                for (i, &ci) in coef.iter().enumerate() {
                    for d in 0..3 {
                        gr[d] += ci * grad_ref[d][(q, i)];
                    }
                }
                // ∇_x = B^{-T} ∇_ξ.
                for d in 0..3 {
                    out[d][(q, c)] =
                        inv_b[0][d] * gr[0] + inv_b[1][d] * gr[1] + inv_b[2][d] * gr[2];
                }
            }
        }
        out
    }

    /// L² norm over the mesh, via orthonormality: ‖v‖² = Σ_e detJ_e Σ c².
    pub fn l2_norm(&self, mesh: &TetMesh) -> f64 {
        let mut s = 0.0;
        for e in 0..self.n_elems {
            let det = mesh.geom[e].det;
            for c in 0..self.ncomp {
                for &ci in self.comp(e, c) {
                    s += det * ci * ci;
                }
            }
        }
        s.sqrt()
    }

    /// In-place axpy: `self += alpha · other` (same layout required).
    pub fn axpy(&mut self, alpha: f64, other: &DgField) {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }
}

/// L² projection of a smooth function onto the degree-`degree` broken
/// space. `f(x, out)` writes the `ncomp` component values at the physical
/// point `x`. `quad_degree` sets the quadrature used for the moments.
pub fn l2_project(
    mesh: &TetMesh,
    basis: &ScalarBasis,
    ncomp: usize,
    quad_degree: usize,
    f: &dyn Fn([f64; 3], &mut [f64]),
) -> Result<DgField> {
    assert_eq!(basis.shape, Shape::Tet);
    let rule = make_quadrature(Shape::Tet, quad_degree.min(MAX_DEGREE))?;
    let phi = basis.eval(&rule.points);
    let n_modes = basis.dim();
    let mut field = DgField::zeros(basis.degree, ncomp, mesh.n_elems(), n_modes);
    let mut vals = vec![0.0; ncomp];
    for e in 0..mesh.n_elems() {
        let geom = &mesh.geom[e];
        for (q, pt) in rule.points.iter().enumerate() {
            let x = geom.to_phys(*pt);
            f(x, &mut vals);
            let w = rule.weights[q];
            for c in 0..ncomp {
                let fx = vals[c] * w;
                let slice = field.comp_mut(e, c);
                for (i, s) in slice.iter_mut().enumerate() {
                    // detJ cancels: mass is detJ·I, moment carries detJ.
                    *s += fx * phi[(q, i)];
                }
            }
        }
    }
    Ok(field)
}

/// Fill a field with uniform random coefficients in `[-scale, scale]`.
pub fn random_field<R: Rng>(
    degree: usize,
    ncomp: usize,
    n_elems: usize,
    n_modes: usize,
    scale: f64,
    rng: &mut R,
) -> DgField {
    let mut field = DgField::zeros(degree, ncomp, n_elems, n_modes);
    for c in field.coeffs.iter_mut() {
        *c = rng.gen_range(-scale..=scale);
    }
    field
}
