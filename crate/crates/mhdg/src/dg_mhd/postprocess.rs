//! Postprocessing of a discontinuous velocity into an exactly
//! divergence-conforming Raviart–Thomas field.
//!
//! Per element the target space is `P_k³ ⊕ x̃·P̃_k`, where `x̃` is the
//! element-centered, diameter-scaled coordinate and `P̃_k` the homogeneous
//! polynomials of degree k. The projected field matches the input against
//! all of `P_{k−1}³` inside the element and matches the *face-averaged*
//! normal trace against `P_k` on every face. The resulting normal
//! component is single-valued across faces, which is what makes the
//! convection form dissipative when this field is used as the transport
//! velocity.

use nalgebra::{DMatrix, DVector};

use super::tables::DgTables;
use crate::error::{Error, Result};
use crate::fem_core::basis::monomial_exponents;
use crate::fem_core::{BasisSet, DgField, Shape};
use crate::mesh::TetMesh;

use super::forms::Advection;

/// Exponent triples of the homogeneous monomials of exact degree `k`.
fn homogeneous_exponents(k: usize) -> Vec<[u32; 3]> {
    monomial_exponents(Shape::Tet, k)
        .into_iter()
        .filter(|e| (e[0] + e[1] + e[2]) as usize == k)
        .collect()
}

/// A per-element Raviart–Thomas field: modal `P_k³` part plus the radial
/// tail `x̃·P̃_k`.
#[derive(Debug, Clone)]
pub struct RtField {
    /// Polynomial degree k.
    pub k: usize,
    /// Number of elements.
    pub n_elems: usize,
    /// Modes per component of the `P_k` part.
    pub m_k: usize,
    /// Number of tail functions (`dim P̃_k = (k+1)(k+2)/2`).
    pub n_tail: usize,
    /// Tail monomial exponents in `x̃`.
    pub tail_exp: Vec<[u32; 3]>,
    /// Coefficients per element: `3·m_k` modal values then `n_tail` tail
    /// values; stride `3·m_k + n_tail`.
    pub coeffs: Vec<f64>,
}

impl RtField {
    fn stride(&self) -> usize {
        3 * self.m_k + self.n_tail
    }

    /// Coefficient slice of one element.
    pub fn elem(&self, e: usize) -> &[f64] {
        let s = self.stride();
        &self.coeffs[e * s..(e + 1) * s]
    }

    /// Element centroid and diameter used by the tail scaling.
    fn chart(mesh: &TetMesh, e: usize) -> ([f64; 3], f64) {
        let tet = &mesh.tets[e];
        let mut c = [0.0; 3];
        for &v in tet.iter() {
            for d in 0..3 {
                c[d] += 0.25 * mesh.vertices[v][d];
            }
        }
        (c, mesh.h_k[e])
    }

    /// Evaluate inside element `e` at a physical point.
    pub fn eval(&self, mesh: &TetMesh, basis: &BasisSet, e: usize, x: [f64; 3]) -> [f64; 3] {
        let geom = &mesh.geom[e];
        let xi = geom.to_ref(x);
        let phi = basis.tet(self.k).eval(&[xi]);
        let z = self.elem(e);
        let mut out = [0.0; 3];
        for c in 0..3 {
            for m in 0..self.m_k {
                out[c] += z[c * self.m_k + m] * phi[(0, m)];
            }
        }
        let (cen, h) = Self::chart(mesh, e);
        let xt = [
            (x[0] - cen[0]) / h,
            (x[1] - cen[1]) / h,
            (x[2] - cen[2]) / h,
        ];
        for (t, exp) in self.tail_exp.iter().enumerate() {
            let mono = xt[0].powi(exp[0] as i32)
                * xt[1].powi(exp[1] as i32)
                * xt[2].powi(exp[2] as i32);
            let ct = z[3 * self.m_k + t];
            for c in 0..3 {
                out[c] += ct * xt[c] * mono;
            }
        }
        out
    }

    /// Divergence inside element `e` at a physical point. The tail terms
    /// use the homogeneity identity ∇·(x̃ m̃) = (3+k)·m̃/h.
    pub fn div(&self, mesh: &TetMesh, basis: &BasisSet, e: usize, x: [f64; 3]) -> f64 {
        let geom = &mesh.geom[e];
        let xi = geom.to_ref(x);
        let grad = basis.tet(self.k).eval_grad(&[xi]);
        let z = self.elem(e);
        let mut div = 0.0;
        for c in 0..3 {
            for m in 0..self.m_k {
                // Physical derivative ∂φ/∂x_c of the c-th component.
                let g = [grad[0][(0, m)], grad[1][(0, m)], grad[2][(0, m)]];
                let gp = geom.inv_b[0][c] * g[0] + geom.inv_b[1][c] * g[1] + geom.inv_b[2][c] * g[2];
                div += z[c * self.m_k + m] * gp;
            }
        }
        let (cen, h) = Self::chart(mesh, e);
        let xt = [
            (x[0] - cen[0]) / h,
            (x[1] - cen[1]) / h,
            (x[2] - cen[2]) / h,
        ];
        for (t, exp) in self.tail_exp.iter().enumerate() {
            let mono = xt[0].powi(exp[0] as i32)
                * xt[1].powi(exp[1] as i32)
                * xt[2].powi(exp[2] as i32);
            div += z[3 * self.m_k + t] * (3.0 + self.k as f64) * mono / h;
        }
        div
    }

    /// Largest tail coefficient magnitude over all elements.
    pub fn max_tail_coeff(&self) -> f64 {
        let s = self.stride();
        let mut mx: f64 = 0.0;
        for e in 0..self.n_elems {
            for t in 0..self.n_tail {
                mx = mx.max(self.coeffs[e * s + 3 * self.m_k + t].abs());
            }
        }
        mx
    }

    /// Largest modal coefficient of the divergence (projected per element
    /// onto the degree-k reference basis) over all elements.
    pub fn max_div_coeff(&self, mesh: &TetMesh, basis: &BasisSet, tabs: &DgTables) -> f64 {
        let vol = &tabs.vol;
        let m = vol.phi_u.ncols();
        let mut mx: f64 = 0.0;
        for e in 0..self.n_elems {
            let geom = &mesh.geom[e];
            let mut coeff = vec![0.0; m];
            for q in 0..vol.npts() {
                let x = geom.to_phys(vol.rule.points[q]);
                let dv = self.div(mesh, basis, e, x);
                let w = vol.rule.weights[q];
                for (i, ci) in coeff.iter_mut().enumerate() {
                    *ci += w * dv * vol.phi_u[(q, i)];
                }
            }
            for ci in coeff {
                mx = mx.max(ci.abs());
            }
        }
        mx
    }

    /// Global L² norm by quadrature.
    pub fn l2_norm(&self, mesh: &TetMesh, basis: &BasisSet, tabs: &DgTables) -> f64 {
        let vol = &tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems {
            let geom = &mesh.geom[e];
            for q in 0..vol.npts() {
                let x = geom.to_phys(vol.rule.points[q]);
                let v = self.eval(mesh, basis, e, x);
                acc += vol.rule.weights[q] * geom.det * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            }
        }
        acc.sqrt()
    }
}

/// Borrowed view implementing the advection interface.
pub struct RtView<'a> {
    /// The field.
    pub field: &'a RtField,
    /// Mesh providing element charts.
    pub mesh: &'a TetMesh,
    /// Basis set for the modal part.
    pub basis: &'a BasisSet,
}

impl Advection for RtView<'_> {
    fn eval(&self, elem: usize, x: [f64; 3]) -> [f64; 3] {
        self.field.eval(self.mesh, self.basis, elem, x)
    }
}

/// Project a discontinuous velocity into the divergence-conforming space:
/// element moments against `P_{k−1}³` and face moments of the averaged
/// normal trace against `P_k(F)`.
pub fn postprocess_divfree(
    mesh: &TetMesh,
    basis: &BasisSet,
    tabs: &DgTables,
    u: &DgField,
) -> Result<RtField> {
    let k = tabs.k;
    let vol = &tabs.vol;
    let m_k = vol.phi_u.ncols();
    let m_km1 = vol.phi_q.ncols();
    let tail_exp = homogeneous_exponents(k);
    let n_tail = tail_exp.len();
    let n_loc = 3 * m_k + n_tail;
    let m_f = tabs.faces[0].lambda.ncols();
    debug_assert_eq!(3 * m_km1 + 4 * m_f, n_loc, "projection system must be square");

    let mut out = RtField {
        k,
        n_elems: mesh.n_elems(),
        m_k,
        n_tail,
        tail_exp: tail_exp.clone(),
        coeffs: vec![0.0; mesh.n_elems() * n_loc],
    };

    // Face averages of u·n are shared by both incident elements; compute
    // them once per face: avg_un[f][q].
    let mut avg_un: Vec<Vec<f64>> = Vec::with_capacity(tabs.faces.len());
    for ft in &tabs.faces {
        let uo = u.eval_with_table(ft.own.elem, &ft.own.phi_u);
        let vals = match &ft.nbr {
            Some(nbr) => {
                let un = u.eval_with_table(nbr.elem, &nbr.phi_u);
                (0..ft.npts())
                    .map(|q| {
                        (0..3)
                            .map(|c| 0.5 * (uo[(q, c)] + un[(q, c)]) * ft.n[c])
                            .sum()
                    })
                    .collect()
            }
            None => (0..ft.npts())
                .map(|q| (0..3).map(|c| uo[(q, c)] * ft.n[c]).sum())
                .collect(),
        };
        avg_un.push(vals);
    }

    for e in 0..mesh.n_elems() {
        let geom = &mesh.geom[e];
        let (cen, h) = RtField::chart(mesh, e);
        let mut mat = DMatrix::<f64>::zeros(n_loc, n_loc);
        let mut rhs = DVector::<f64>::zeros(n_loc);

        // Volume moments against P_{k−1}³.
        let uv = u.eval_with_table(e, &vol.phi_u);
        for q in 0..vol.npts() {
            let w = vol.rule.weights[q] * geom.det;
            let x = geom.to_phys(vol.rule.points[q]);
            let xt = [
                (x[0] - cen[0]) / h,
                (x[1] - cen[1]) / h,
                (x[2] - cen[2]) / h,
            ];
            for c in 0..3 {
                for i in 0..m_km1 {
                    let row = c * m_km1 + i;
                    let ti = w * vol.phi_q[(q, i)];
                    for j in 0..m_k {
                        mat[(row, c * m_k + j)] += ti * vol.phi_u[(q, j)];
                    }
                    for (t, exp) in tail_exp.iter().enumerate() {
                        let mono = xt[0].powi(exp[0] as i32)
                            * xt[1].powi(exp[1] as i32)
                            * xt[2].powi(exp[2] as i32);
                        mat[(row, 3 * m_k + t)] += ti * xt[c] * mono;
                    }
                    rhs[row] += ti * uv[(q, c)];
                }
            }
        }

        // Face moments of the normal trace against P_k(F).
        for (lf, &f) in mesh.tet_faces[e].iter().enumerate() {
            let ft = &tabs.faces[f];
            let side = if ft.own.elem == e {
                &ft.own
            } else {
                ft.nbr.as_ref().expect("face incident to element")
            };
            debug_assert_eq!(side.elem, e);
            for q in 0..ft.npts() {
                let w = ft.w[q];
                let x = ft.x[q];
                let xt = [
                    (x[0] - cen[0]) / h,
                    (x[1] - cen[1]) / h,
                    (x[2] - cen[2]) / h,
                ];
                let xtn = xt[0] * ft.n[0] + xt[1] * ft.n[1] + xt[2] * ft.n[2];
                for i in 0..m_f {
                    let row = 3 * m_km1 + lf * m_f + i;
                    let ti = w * ft.lambda[(q, i)];
                    for c in 0..3 {
                        for j in 0..m_k {
                            mat[(row, c * m_k + j)] += ti * ft.n[c] * side.phi_u[(q, j)];
                        }
                    }
                    for (t, exp) in tail_exp.iter().enumerate() {
                        let mono = xt[0].powi(exp[0] as i32)
                            * xt[1].powi(exp[1] as i32)
                            * xt[2].powi(exp[2] as i32);
                        mat[(row, 3 * m_k + t)] += ti * xtn * mono;
                    }
                    rhs[row] += ti * avg_un[f][q];
                }
            }
        }

        let lu = mat.lu();
        let sol = lu.solve(&rhs).ok_or_else(|| {
            Error::Linalg(format!(
                "divergence-conforming projection singular on element {e}"
            ))
        })?;
        out.coeffs[e * n_loc..(e + 1) * n_loc].copy_from_slice(sol.as_slice());
    }
    Ok(out)
}
