//! The bilinear and trilinear forms of the interior-penalty scheme, in two
//! independent realizations: sparse assembly into triplet buffers (used by
//! the solver) and direct evaluation on coefficient fields (used as the
//! cross-checking oracle and by the energy-identity diagnostic).
//!
//! Face conventions: every face stores the *owner* outward unit normal
//! `n`. Scalar jumps are `owner − neighbor` against that normal, vector
//! tangential jumps are `n × (owner − neighbor)`, and averages are plain
//! arithmetic means. On boundary faces averages become one-sided values
//! and jumps become traces (the second boundary-condition family simply
//! omits boundary faces from the magnetic face sums).

use nalgebra::DMatrix;

use super::tables::{DgTables, FaceTab, SideTab};
use crate::fem_core::{DgField, DgLayout};
use crate::linalg::TripletBuffer;
use crate::mesh::TetMesh;
use crate::BcType;

/// Threshold below which a face normal velocity is treated as zero by the
/// upwind switch.
pub const UPWIND_TOL: f64 = 1e-13;

/// Advection velocity seen by the convection form: evaluable per element
/// at physical points. Implemented by constants, closures, and the
/// divergence-conforming postprocessed field.
pub trait Advection {
    /// Value inside element `elem` at the physical point `x`.
    fn eval(&self, elem: usize, x: [f64; 3]) -> [f64; 3];
}

impl Advection for [f64; 3] {
    fn eval(&self, _elem: usize, _x: [f64; 3]) -> [f64; 3] {
        *self
    }
}

impl<F: Fn(usize, [f64; 3]) -> [f64; 3]> Advection for F {
    fn eval(&self, elem: usize, x: [f64; 3]) -> [f64; 3] {
        self(elem, x)
    }
}

/// `v × e_c` (equivalently ε_{adc} v_d); also the curl pattern
/// `∇×(φ e_c) = ∇φ × e_c`.
#[inline]
fn axis_cross(v: [f64; 3], c: usize) -> [f64; 3] {
    match c {
        0 => [0.0, v[2], -v[1]],
        1 => [-v[2], 0.0, v[0]],
        _ => [v[1], -v[0], 0.0],
    }
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Physical gradients of a tabulated reference basis on one element.
fn phys_grads(grad_ref: &[DMatrix<f64>; 3], inv_b: &[[f64; 3]; 3]) -> [DMatrix<f64>; 3] {
    let (npts, m) = (grad_ref[0].nrows(), grad_ref[0].ncols());
    let mut out = [
        DMatrix::zeros(npts, m),
        DMatrix::zeros(npts, m),
        DMatrix::zeros(npts, m),
    ];
    for q in 0..npts {
        for i in 0..m {
            let gr = [grad_ref[0][(q, i)], grad_ref[1][(q, i)], grad_ref[2][(q, i)]];
            for d in 0..3 {
                out[d][(q, i)] = inv_b[0][d] * gr[0] + inv_b[1][d] * gr[1] + inv_b[2][d] * gr[2];
            }
        }
    }
    out
}

/// The sides of a face with the sign each contributes to jumps.
fn sides(ft: &FaceTab) -> Vec<(&SideTab, f64)> {
    match &ft.nbr {
        None => vec![(&ft.own, 1.0)],
        Some(nb) => vec![(&ft.own, 1.0), (nb, -1.0)],
    }
}

/// Physical gradients of every component of `field` at a face side.
fn side_field_grads(field: &DgField, side: &SideTab) -> [DMatrix<f64>; 3] {
    let npts = side.phi_u.nrows();
    let m = side.grad_u[0].ncols();
    let mut out = [
        DMatrix::zeros(npts, field.ncomp),
        DMatrix::zeros(npts, field.ncomp),
        DMatrix::zeros(npts, field.ncomp),
    ];
    for c in 0..field.ncomp {
        let coef = field.comp(side.elem, c);
        for q in 0..npts {
            for d in 0..3 {
                let mut s = 0.0;
                for i in 0..m {
                    s += coef[i] * side.grad_u[d][(q, i)];
                }
                out[d][(q, c)] = s;
            }
        }
    }
    out
}

/// Assembly and direct evaluation of every form of the scheme on one
/// (mesh, dof-layout, table) triple.
pub struct DgOps<'a> {
    /// The mesh.
    pub mesh: &'a TetMesh,
    /// Global dof layout.
    pub layout: &'a DgLayout,
    /// Precomputed quadrature/basis tables.
    pub tabs: &'a DgTables,
}

impl<'a> DgOps<'a> {
    /// Bundle references; no precomputation beyond what `tabs` holds.
    pub fn new(mesh: &'a TetMesh, layout: &'a DgLayout, tabs: &'a DgTables) -> Self {
        DgOps { mesh, layout, tabs }
    }

    fn n_elems(&self) -> usize {
        self.mesh.tets.len()
    }

    // ------------------------------------------------------------------
    // Viscous block: symmetric interior-penalty Laplacian (component-wise).
    // ------------------------------------------------------------------

    /// Assemble the viscous form into (velocity-row, velocity-column)
    /// entries.
    pub fn assemble_a(&self, nu: f64, a0: f64, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let g = phys_grads(&vol.grad_u_ref, &geom.inv_b);
            let mut loc = DMatrix::<f64>::zeros(m, m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                for i in 0..m {
                    for j in 0..m {
                        let mut s = 0.0;
                        for d in 0..3 {
                            s += g[d][(q, i)] * g[d][(q, j)];
                        }
                        loc[(i, j)] += w * s;
                    }
                }
            }
            for c in 0..3 {
                for i in 0..m {
                    for j in 0..m {
                        let v = nu * loc[(i, j)];
                        if v != 0.0 {
                            out.push(lay.u_dof(e, c, i), lay.u_dof(e, c, j), v);
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            let ss = sides(ft);
            let avg = if ft.is_boundary() { 1.0 } else { 0.5 };
            let pen = a0 / ft.h_f;
            // Normal derivatives of the degree-k basis per side.
            let dns: Vec<DMatrix<f64>> = ss
                .iter()
                .map(|(tab, _)| {
                    let mut dn = DMatrix::zeros(ft.npts(), m);
                    for q in 0..ft.npts() {
                        for i in 0..m {
                            dn[(q, i)] = (0..3)
                                .map(|d| ft.n[d] * tab.grad_u[d][(q, i)])
                                .sum::<f64>();
                        }
                    }
                    dn
                })
                .collect();
            for (sv, &(tv, sgv)) in ss.iter().enumerate() {
                for (su, &(tu, sgu)) in ss.iter().enumerate() {
                    let mut loc = DMatrix::<f64>::zeros(m, m);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        for i in 0..m {
                            let tvi = tv.phi_u[(q, i)];
                            let dvi = dns[sv][(q, i)];
                            for j in 0..m {
                                loc[(i, j)] += w
                                    * (-avg * dns[su][(q, j)] * sgv * tvi
                                        - avg * dvi * sgu * tu.phi_u[(q, j)]
                                        + pen * sgu * sgv * tu.phi_u[(q, j)] * tvi);
                            }
                        }
                    }
                    for c in 0..3 {
                        for i in 0..m {
                            for j in 0..m {
                                let v = nu * loc[(i, j)];
                                if v != 0.0 {
                                    out.push(
                                        lay.u_dof(tv.elem, c, i),
                                        lay.u_dof(tu.elem, c, j),
                                        v,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the viscous form on coefficient fields.
    pub fn eval_a(&self, nu: f64, a0: f64, u: &DgField, v: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let gu = u.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            let gv = v.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let mut s = 0.0;
                for c in 0..3 {
                    for d in 0..3 {
                        s += gu[d][(q, c)] * gv[d][(q, c)];
                    }
                }
                acc += w * s;
            }
        }
        for ft in &self.tabs.faces {
            let uo = u.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let vo = v.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let guo = side_field_grads(u, &ft.own);
            let gvo = side_field_grads(v, &ft.own);
            let nbr = ft.nbr.as_ref();
            let un = nbr.map(|nb| u.eval_with_table(nb.elem, &nb.phi_u));
            let vn = nbr.map(|nb| v.eval_with_table(nb.elem, &nb.phi_u));
            let gun = nbr.map(|nb| side_field_grads(u, nb));
            let gvn = nbr.map(|nb| side_field_grads(v, nb));
            let pen = a0 / ft.h_f;
            for q in 0..ft.npts() {
                let w = ft.w[q];
                for c in 0..3 {
                    let dn_u_own: f64 = (0..3).map(|d| ft.n[d] * guo[d][(q, c)]).sum();
                    let dn_v_own: f64 = (0..3).map(|d| ft.n[d] * gvo[d][(q, c)]).sum();
                    let (dn_u_avg, dn_v_avg, ju, jv) = match (&un, &vn, &gun, &gvn) {
                        (Some(un), Some(vn), Some(gun), Some(gvn)) => {
                            let dn_u_nbr: f64 = (0..3).map(|d| ft.n[d] * gun[d][(q, c)]).sum();
                            let dn_v_nbr: f64 = (0..3).map(|d| ft.n[d] * gvn[d][(q, c)]).sum();
                            (
                                0.5 * (dn_u_own + dn_u_nbr),
                                0.5 * (dn_v_own + dn_v_nbr),
                                uo[(q, c)] - un[(q, c)],
                                vo[(q, c)] - vn[(q, c)],
                            )
                        }
                        _ => (dn_u_own, dn_v_own, uo[(q, c)], vo[(q, c)]),
                    };
                    acc += w * (-dn_u_avg * jv - dn_v_avg * ju + pen * ju * jv);
                }
            }
        }
        nu * acc
    }

    // ------------------------------------------------------------------
    // Convection: upwind transport against a given advection field.
    // ------------------------------------------------------------------

    /// Assemble the convection form (velocity rows/columns). The normal
    /// velocity on every face is evaluated from the owner side.
    pub fn assemble_o(&self, beta: &dyn Advection, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let g = phys_grads(&vol.grad_u_ref, &geom.inv_b);
            let mut loc = DMatrix::<f64>::zeros(m, m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let bq = beta.eval(e, geom.to_phys(vol.rule.points[q]));
                for j in 0..m {
                    let conv = bq[0] * g[0][(q, j)] + bq[1] * g[1][(q, j)] + bq[2] * g[2][(q, j)];
                    for i in 0..m {
                        loc[(i, j)] += w * conv * vol.phi_u[(q, i)];
                    }
                }
            }
            for c in 0..3 {
                for i in 0..m {
                    for j in 0..m {
                        let v = loc[(i, j)];
                        if v != 0.0 {
                            out.push(lay.u_dof(e, c, i), lay.u_dof(e, c, j), v);
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            let own = &ft.own;
            match &ft.nbr {
                Some(nbr) => {
                    // Four m×m blocks indexed (test-side, trial-side).
                    let mut loc =
                        [[DMatrix::<f64>::zeros(m, m), DMatrix::<f64>::zeros(m, m)],
                         [DMatrix::<f64>::zeros(m, m), DMatrix::<f64>::zeros(m, m)]];
                    for q in 0..ft.npts() {
                        let bn = dot(beta.eval(own.elem, ft.x[q]), ft.n);
                        let w = ft.w[q];
                        if bn < -UPWIND_TOL {
                            // Inflow for the owner: ⟨bn (u' − u), v⟩ on the
                            // owner side.
                            for i in 0..m {
                                let tv = own.phi_u[(q, i)];
                                for j in 0..m {
                                    loc[0][1][(i, j)] += w * bn * nbr.phi_u[(q, j)] * tv;
                                    loc[0][0][(i, j)] -= w * bn * own.phi_u[(q, j)] * tv;
                                }
                            }
                        } else if bn > UPWIND_TOL {
                            // Inflow for the neighbor (its normal velocity
                            // is −bn): ⟨−bn (u − u'), v'⟩.
                            for i in 0..m {
                                let tv = nbr.phi_u[(q, i)];
                                for j in 0..m {
                                    loc[1][0][(i, j)] -= w * bn * own.phi_u[(q, j)] * tv;
                                    loc[1][1][(i, j)] += w * bn * nbr.phi_u[(q, j)] * tv;
                                }
                            }
                        }
                    }
                    let elems = [own.elem, nbr.elem];
                    for (sv, row_e) in elems.iter().enumerate() {
                        for (su, col_e) in elems.iter().enumerate() {
                            for c in 0..3 {
                                for i in 0..m {
                                    for j in 0..m {
                                        let v = loc[sv][su][(i, j)];
                                        if v != 0.0 {
                                            out.push(
                                                lay.u_dof(*row_e, c, i),
                                                lay.u_dof(*col_e, c, j),
                                                v,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                None => {
                    let mut loc = DMatrix::<f64>::zeros(m, m);
                    for q in 0..ft.npts() {
                        let bn = dot(beta.eval(own.elem, ft.x[q]), ft.n);
                        if bn < -UPWIND_TOL {
                            // −⟨bn u, v⟩ on the inflow boundary.
                            let w = ft.w[q];
                            for i in 0..m {
                                for j in 0..m {
                                    loc[(i, j)] -= w * bn * own.phi_u[(q, j)] * own.phi_u[(q, i)];
                                }
                            }
                        }
                    }
                    for c in 0..3 {
                        for i in 0..m {
                            for j in 0..m {
                                let v = loc[(i, j)];
                                if v != 0.0 {
                                    out.push(lay.u_dof(own.elem, c, i), lay.u_dof(own.elem, c, j), v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the convection form.
    pub fn eval_o(&self, beta: &dyn Advection, u: &DgField, v: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let gu = u.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            let vv = v.eval_with_table(e, &vol.phi_u);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let bq = beta.eval(e, geom.to_phys(vol.rule.points[q]));
                for c in 0..3 {
                    let conv = bq[0] * gu[0][(q, c)] + bq[1] * gu[1][(q, c)] + bq[2] * gu[2][(q, c)];
                    acc += w * conv * vv[(q, c)];
                }
            }
        }
        for ft in &self.tabs.faces {
            let own = &ft.own;
            let uo = u.eval_with_table(own.elem, &own.phi_u);
            let vo = v.eval_with_table(own.elem, &own.phi_u);
            match &ft.nbr {
                Some(nbr) => {
                    let un = u.eval_with_table(nbr.elem, &nbr.phi_u);
                    let vn = v.eval_with_table(nbr.elem, &nbr.phi_u);
                    for q in 0..ft.npts() {
                        let bn = dot(beta.eval(own.elem, ft.x[q]), ft.n);
                        let w = ft.w[q];
                        if bn < -UPWIND_TOL {
                            for c in 0..3 {
                                acc += w * bn * (un[(q, c)] - uo[(q, c)]) * vo[(q, c)];
                            }
                        } else if bn > UPWIND_TOL {
                            for c in 0..3 {
                                acc -= w * bn * (uo[(q, c)] - un[(q, c)]) * vn[(q, c)];
                            }
                        }
                    }
                }
                None => {
                    for q in 0..ft.npts() {
                        let bn = dot(beta.eval(own.elem, ft.x[q]), ft.n);
                        if bn < -UPWIND_TOL {
                            let w = ft.w[q];
                            for c in 0..3 {
                                acc -= w * bn * uo[(q, c)] * vo[(q, c)];
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    // ------------------------------------------------------------------
    // Velocity–pressure coupling.
    // ------------------------------------------------------------------

    /// Assemble the divergence form into (pressure-row, velocity-column)
    /// entries; the transposed velocity-row block is produced by the
    /// caller from the same buffer.
    pub fn assemble_b(&self, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let mq = vol.phi_q.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let g = phys_grads(&vol.grad_u_ref, &geom.inv_b);
            let mut loc = DMatrix::<f64>::zeros(mq, 3 * m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                for i in 0..mq {
                    let ti = w * vol.phi_q[(q, i)];
                    for c in 0..3 {
                        for j in 0..m {
                            loc[(i, c * m + j)] -= ti * g[c][(q, j)];
                        }
                    }
                }
            }
            for i in 0..mq {
                for c in 0..3 {
                    for j in 0..m {
                        let v = loc[(i, c * m + j)];
                        if v != 0.0 {
                            out.push(lay.p_dof(e, i), lay.u_dof(e, c, j), v);
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            let ss = sides(ft);
            let avg = if ft.is_boundary() { 1.0 } else { 0.5 };
            for &(tq, _) in &ss {
                for &(tu, sgu) in &ss {
                    let mut loc = DMatrix::<f64>::zeros(mq, 3 * m);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        for i in 0..mq {
                            let ti = w * avg * tq.phi_q[(q, i)];
                            for c in 0..3 {
                                let nc = sgu * ft.n[c];
                                for j in 0..m {
                                    loc[(i, c * m + j)] += ti * nc * tu.phi_u[(q, j)];
                                }
                            }
                        }
                    }
                    for i in 0..mq {
                        for c in 0..3 {
                            for j in 0..m {
                                let v = loc[(i, c * m + j)];
                                if v != 0.0 {
                                    out.push(lay.p_dof(tq.elem, i), lay.u_dof(tu.elem, c, j), v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the divergence form on fields.
    pub fn eval_b(&self, u: &DgField, qf: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let gu = u.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            let qv = qf.eval_with_table(e, &vol.phi_q);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let div = gu[0][(q, 0)] + gu[1][(q, 1)] + gu[2][(q, 2)];
                acc -= w * div * qv[(q, 0)];
            }
        }
        for ft in &self.tabs.faces {
            let uo = u.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let qo = qf.eval_with_table(ft.own.elem, &ft.own.phi_q);
            match &ft.nbr {
                Some(nbr) => {
                    let un = u.eval_with_table(nbr.elem, &nbr.phi_u);
                    let qn = qf.eval_with_table(nbr.elem, &nbr.phi_q);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let qavg = 0.5 * (qo[(q, 0)] + qn[(q, 0)]);
                        let jn: f64 =
                            (0..3).map(|c| (uo[(q, c)] - un[(q, c)]) * ft.n[c]).sum();
                        acc += w * qavg * jn;
                    }
                }
                None => {
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let unrm: f64 = (0..3).map(|c| uo[(q, c)] * ft.n[c]).sum();
                        acc += w * qo[(q, 0)] * unrm;
                    }
                }
            }
        }
        acc
    }

    // ------------------------------------------------------------------
    // Magnetic block: symmetric interior-penalty curl–curl.
    // ------------------------------------------------------------------

    /// Assemble the magnetic form into (magnetic-row, magnetic-column)
    /// entries. `kappa_nu_m` is the product of the coupling constant and
    /// the magnetic diffusivity.
    pub fn assemble_m(&self, kappa_nu_m: f64, m0: f64, bc: BcType, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let g = phys_grads(&vol.grad_u_ref, &geom.inv_b);
            let mut loc = DMatrix::<f64>::zeros(3 * m, 3 * m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                for cu in 0..3 {
                    for j in 0..m {
                        let curl_u =
                            axis_cross([g[0][(q, j)], g[1][(q, j)], g[2][(q, j)]], cu);
                        for cv in 0..3 {
                            for i in 0..m {
                                let curl_v =
                                    axis_cross([g[0][(q, i)], g[1][(q, i)], g[2][(q, i)]], cv);
                                loc[(cv * m + i, cu * m + j)] += w * dot(curl_u, curl_v);
                            }
                        }
                    }
                }
            }
            for cv in 0..3 {
                for i in 0..m {
                    for cu in 0..3 {
                        for j in 0..m {
                            let v = kappa_nu_m * loc[(cv * m + i, cu * m + j)];
                            if v != 0.0 {
                                out.push(lay.b_dof(e, cv, i), lay.b_dof(e, cu, j), v);
                            }
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let ss = sides(ft);
            let avg = if ft.is_boundary() { 1.0 } else { 0.5 };
            let pen = m0 / ft.h_f;
            let nxe: [[f64; 3]; 3] = std::array::from_fn(|c| axis_cross(ft.n, c));
            for (sv, &(tv, sgv)) in ss.iter().enumerate() {
                for (su, &(tu, sgu)) in ss.iter().enumerate() {
                    let _ = (sv, su);
                    let mut loc = DMatrix::<f64>::zeros(3 * m, 3 * m);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        for cu in 0..3 {
                            for j in 0..m {
                                let gu =
                                    [tu.grad_u[0][(q, j)], tu.grad_u[1][(q, j)], tu.grad_u[2][(q, j)]];
                                let curl_u = axis_cross(gu, cu);
                                let tan_u = sgu * tu.phi_u[(q, j)];
                                for cv in 0..3 {
                                    for i in 0..m {
                                        let gv = [
                                            tv.grad_u[0][(q, i)],
                                            tv.grad_u[1][(q, i)],
                                            tv.grad_u[2][(q, i)],
                                        ];
                                        let curl_v = axis_cross(gv, cv);
                                        let tan_v = sgv * tv.phi_u[(q, i)];
                                        loc[(cv * m + i, cu * m + j)] += w
                                            * (-avg * dot(curl_u, nxe[cv]) * tan_v
                                                - avg * dot(curl_v, nxe[cu]) * tan_u
                                                + pen * tan_u * tan_v * dot(nxe[cu], nxe[cv]));
                                    }
                                }
                            }
                        }
                    }
                    for cv in 0..3 {
                        for i in 0..m {
                            for cu in 0..3 {
                                for j in 0..m {
                                    let v = kappa_nu_m * loc[(cv * m + i, cu * m + j)];
                                    if v != 0.0 {
                                        out.push(
                                            lay.b_dof(tv.elem, cv, i),
                                            lay.b_dof(tu.elem, cu, j),
                                            v,
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the magnetic form.
    pub fn eval_m(
        &self,
        kappa_nu_m: f64,
        m0: f64,
        bc: BcType,
        b: &DgField,
        c: &DgField,
    ) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        let curl_at = |g: &[DMatrix<f64>; 3], q: usize| -> [f64; 3] {
            [
                g[1][(q, 2)] - g[2][(q, 1)],
                g[2][(q, 0)] - g[0][(q, 2)],
                g[0][(q, 1)] - g[1][(q, 0)],
            ]
        };
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let gb = b.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            let gc = c.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                acc += w * dot(curl_at(&gb, q), curl_at(&gc, q));
            }
        }
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let pen = m0 / ft.h_f;
            let bo = b.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let co = c.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let gbo = side_field_grads(b, &ft.own);
            let gco = side_field_grads(c, &ft.own);
            match &ft.nbr {
                Some(nbr) => {
                    let bn = b.eval_with_table(nbr.elem, &nbr.phi_u);
                    let cn = c.eval_with_table(nbr.elem, &nbr.phi_u);
                    let gbn = side_field_grads(b, nbr);
                    let gcn = side_field_grads(c, nbr);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let curl_b_avg: [f64; 3] = {
                            let a = curl_at(&gbo, q);
                            let bq = curl_at(&gbn, q);
                            std::array::from_fn(|d| 0.5 * (a[d] + bq[d]))
                        };
                        let curl_c_avg: [f64; 3] = {
                            let a = curl_at(&gco, q);
                            let bq = curl_at(&gcn, q);
                            std::array::from_fn(|d| 0.5 * (a[d] + bq[d]))
                        };
                        let jb = cross3(
                            ft.n,
                            std::array::from_fn(|d| bo[(q, d)] - bn[(q, d)]),
                        );
                        let jc = cross3(
                            ft.n,
                            std::array::from_fn(|d| co[(q, d)] - cn[(q, d)]),
                        );
                        acc += w
                            * (-dot(curl_b_avg, jc) - dot(curl_c_avg, jb) + pen * dot(jb, jc));
                    }
                }
                None => {
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let jb = cross3(ft.n, std::array::from_fn(|d| bo[(q, d)]));
                        let jc = cross3(ft.n, std::array::from_fn(|d| co[(q, d)]));
                        acc += w
                            * (-dot(curl_at(&gbo, q), jc) - dot(curl_at(&gco, q), jb)
                                + pen * dot(jb, jc));
                    }
                }
            }
        }
        kappa_nu_m * acc
    }

    // ------------------------------------------------------------------
    // Magnetic–multiplier coupling.
    // ------------------------------------------------------------------

    /// Assemble the magnetic-divergence form into (multiplier-row,
    /// magnetic-column) entries.
    pub fn assemble_d(&self, bc: BcType, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let ms = vol.phi_s.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let gs = phys_grads(&vol.grad_s_ref, &geom.inv_b);
            let mut loc = DMatrix::<f64>::zeros(ms, 3 * m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                for i in 0..ms {
                    for c in 0..3 {
                        let gsc = w * gs[c][(q, i)];
                        for j in 0..m {
                            loc[(i, c * m + j)] += gsc * vol.phi_u[(q, j)];
                        }
                    }
                }
            }
            for i in 0..ms {
                for c in 0..3 {
                    for j in 0..m {
                        let v = loc[(i, c * m + j)];
                        if v != 0.0 {
                            out.push(lay.r_dof(e, i), lay.b_dof(e, c, j), v);
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let ss = sides(ft);
            let avg = if ft.is_boundary() { 1.0 } else { 0.5 };
            for &(ts, sgs) in &ss {
                for &(tb, _) in &ss {
                    let mut loc = DMatrix::<f64>::zeros(ms, 3 * m);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        for i in 0..ms {
                            let ti = w * sgs * ts.phi_s[(q, i)];
                            for c in 0..3 {
                                let nc = avg * ft.n[c];
                                for j in 0..m {
                                    loc[(i, c * m + j)] -= ti * nc * tb.phi_u[(q, j)];
                                }
                            }
                        }
                    }
                    for i in 0..ms {
                        for c in 0..3 {
                            for j in 0..m {
                                let v = loc[(i, c * m + j)];
                                if v != 0.0 {
                                    out.push(lay.r_dof(ts.elem, i), lay.b_dof(tb.elem, c, j), v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the magnetic-divergence form.
    pub fn eval_d(&self, bc: BcType, b: &DgField, s: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let bv = b.eval_with_table(e, &vol.phi_u);
            let gs = s.eval_grad_with_table(e, &vol.grad_s_ref, &geom.inv_b);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                for c in 0..3 {
                    acc += w * bv[(q, c)] * gs[c][(q, 0)];
                }
            }
        }
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let bo = b.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let so = s.eval_with_table(ft.own.elem, &ft.own.phi_s);
            match &ft.nbr {
                Some(nbr) => {
                    let bn = b.eval_with_table(nbr.elem, &nbr.phi_u);
                    let sn = s.eval_with_table(nbr.elem, &nbr.phi_s);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let avg_n: f64 = (0..3)
                            .map(|c| 0.5 * (bo[(q, c)] + bn[(q, c)]) * ft.n[c])
                            .sum();
                        acc -= w * avg_n * (so[(q, 0)] - sn[(q, 0)]);
                    }
                }
                None => {
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let bn: f64 = (0..3).map(|c| bo[(q, c)] * ft.n[c]).sum();
                        acc -= w * bn * so[(q, 0)];
                    }
                }
            }
        }
        acc
    }

    // ------------------------------------------------------------------
    // Multiplier penalization.
    // ------------------------------------------------------------------

    /// Assemble the multiplier jump form (multiplier rows/columns) with
    /// the *positive* sign of the form itself; `scale` is the stabilization
    /// constant divided by the product of coupling constant and magnetic
    /// diffusivity.
    pub fn assemble_j(&self, scale: f64, bc: BcType, out: &mut TripletBuffer) {
        let ms = self.tabs.vol.phi_s.ncols();
        let lay = self.layout;
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let ss = sides(ft);
            let pen = scale / ft.h_f;
            for &(tv, sgv) in &ss {
                for &(tu, sgu) in &ss {
                    let mut loc = DMatrix::<f64>::zeros(ms, ms);
                    for q in 0..ft.npts() {
                        let w = ft.w[q] * pen * sgu * sgv;
                        for i in 0..ms {
                            let ti = w * tv.phi_s[(q, i)];
                            for j in 0..ms {
                                loc[(i, j)] += ti * tu.phi_s[(q, j)];
                            }
                        }
                    }
                    for i in 0..ms {
                        for j in 0..ms {
                            let v = loc[(i, j)];
                            if v != 0.0 {
                                out.push(lay.r_dof(tv.elem, i), lay.r_dof(tu.elem, j), v);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the multiplier jump form.
    pub fn eval_j(&self, scale: f64, bc: BcType, r: &DgField, s: &DgField) -> f64 {
        let mut acc = 0.0;
        for ft in &self.tabs.faces {
            if ft.is_boundary() && bc.interior_faces_only() {
                continue;
            }
            let pen = scale / ft.h_f;
            let ro = r.eval_with_table(ft.own.elem, &ft.own.phi_s);
            let so = s.eval_with_table(ft.own.elem, &ft.own.phi_s);
            match &ft.nbr {
                Some(nbr) => {
                    let rn = r.eval_with_table(nbr.elem, &nbr.phi_s);
                    let sn = s.eval_with_table(nbr.elem, &nbr.phi_s);
                    for q in 0..ft.npts() {
                        acc += ft.w[q]
                            * pen
                            * (ro[(q, 0)] - rn[(q, 0)])
                            * (so[(q, 0)] - sn[(q, 0)]);
                    }
                }
                None => {
                    for q in 0..ft.npts() {
                        acc += ft.w[q] * pen * ro[(q, 0)] * so[(q, 0)];
                    }
                }
            }
        }
        acc
    }

    // ------------------------------------------------------------------
    // Velocity–magnetic coupling.
    // ------------------------------------------------------------------

    /// Assemble the coupling form into (velocity-row, magnetic-column)
    /// entries: row i, column j holds the form evaluated with test
    /// velocity i against trial magnetic j, for the given transported
    /// field `d`. The face sum runs over interior faces only, for both
    /// boundary-condition families.
    pub fn assemble_c(&self, kappa: f64, dfield: &DgField, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let g = phys_grads(&vol.grad_u_ref, &geom.inv_b);
            let dv = dfield.eval_with_table(e, &vol.phi_u);
            let mut loc = DMatrix::<f64>::zeros(3 * m, 3 * m);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let dq = [dv[(q, 0)], dv[(q, 1)], dv[(q, 2)]];
                // e_cv × d = −(d × e_cv).
                let vxd: [[f64; 3]; 3] = std::array::from_fn(|cv| {
                    let t = axis_cross(dq, cv);
                    [-t[0], -t[1], -t[2]]
                });
                for cb in 0..3 {
                    for j in 0..m {
                        let curl_b =
                            axis_cross([g[0][(q, j)], g[1][(q, j)], g[2][(q, j)]], cb);
                        for cv in 0..3 {
                            let s = dot(vxd[cv], curl_b);
                            if s == 0.0 {
                                continue;
                            }
                            for i in 0..m {
                                loc[(cv * m + i, cb * m + j)] += w * s * vol.phi_u[(q, i)];
                            }
                        }
                    }
                }
            }
            for cv in 0..3 {
                for i in 0..m {
                    for cb in 0..3 {
                        for j in 0..m {
                            let v = kappa * loc[(cv * m + i, cb * m + j)];
                            if v != 0.0 {
                                out.push(lay.u_dof(e, cv, i), lay.b_dof(e, cb, j), v);
                            }
                        }
                    }
                }
            }
        }
        for ft in &self.tabs.faces {
            let Some(nbr) = &ft.nbr else { continue };
            let nxe: [[f64; 3]; 3] = std::array::from_fn(|c| axis_cross(ft.n, c));
            let d_own = dfield.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let d_nbr = dfield.eval_with_table(nbr.elem, &nbr.phi_u);
            // Test sides carry their own trace of the transported field
            // (the average is over the product); trial sides carry the
            // tangential-jump sign.
            let test_sides: [(&SideTab, &DMatrix<f64>); 2] = [(&ft.own, &d_own), (nbr, &d_nbr)];
            let trial_sides: [(&SideTab, f64); 2] = [(&ft.own, 1.0), (nbr, -1.0)];
            for (tv, dval) in test_sides {
                for (tb, sgb) in trial_sides {
                    let mut loc = DMatrix::<f64>::zeros(3 * m, 3 * m);
                    for q in 0..ft.npts() {
                        let w = ft.w[q];
                        let dq = [dval[(q, 0)], dval[(q, 1)], dval[(q, 2)]];
                        let vxd: [[f64; 3]; 3] = std::array::from_fn(|cv| {
                            let t = axis_cross(dq, cv);
                            [-t[0], -t[1], -t[2]]
                        });
                        for cv in 0..3 {
                            for cb in 0..3 {
                                let s = -0.5 * dot(vxd[cv], nxe[cb]) * sgb;
                                if s == 0.0 {
                                    continue;
                                }
                                for i in 0..m {
                                    let ti = w * s * tv.phi_u[(q, i)];
                                    for j in 0..m {
                                        loc[(cv * m + i, cb * m + j)] += ti * tb.phi_u[(q, j)];
                                    }
                                }
                            }
                        }
                    }
                    for cv in 0..3 {
                        for i in 0..m {
                            for cb in 0..3 {
                                for j in 0..m {
                                    let v = kappa * loc[(cv * m + i, cb * m + j)];
                                    if v != 0.0 {
                                        out.push(
                                            lay.u_dof(tv.elem, cv, i),
                                            lay.b_dof(tb.elem, cb, j),
                                            v,
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Direct evaluation of the coupling form with test velocity `v` and
    /// trial magnetic field `b`.
    pub fn eval_c(&self, kappa: f64, dfield: &DgField, v: &DgField, b: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let vv = v.eval_with_table(e, &vol.phi_u);
            let dv = dfield.eval_with_table(e, &vol.phi_u);
            let gb = b.eval_grad_with_table(e, &vol.grad_u_ref, &geom.inv_b);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let vq = [vv[(q, 0)], vv[(q, 1)], vv[(q, 2)]];
                let dq = [dv[(q, 0)], dv[(q, 1)], dv[(q, 2)]];
                let curl_b = [
                    gb[1][(q, 2)] - gb[2][(q, 1)],
                    gb[2][(q, 0)] - gb[0][(q, 2)],
                    gb[0][(q, 1)] - gb[1][(q, 0)],
                ];
                acc += w * dot(cross3(vq, dq), curl_b);
            }
        }
        for ft in &self.tabs.faces {
            let Some(nbr) = &ft.nbr else { continue };
            let vo = v.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let vn = v.eval_with_table(nbr.elem, &nbr.phi_u);
            let do_ = dfield.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let dn = dfield.eval_with_table(nbr.elem, &nbr.phi_u);
            let bo = b.eval_with_table(ft.own.elem, &ft.own.phi_u);
            let bn = b.eval_with_table(nbr.elem, &nbr.phi_u);
            for q in 0..ft.npts() {
                let w = ft.w[q];
                let vxd_avg: [f64; 3] = {
                    let a = cross3(
                        [vo[(q, 0)], vo[(q, 1)], vo[(q, 2)]],
                        [do_[(q, 0)], do_[(q, 1)], do_[(q, 2)]],
                    );
                    let bb = cross3(
                        [vn[(q, 0)], vn[(q, 1)], vn[(q, 2)]],
                        [dn[(q, 0)], dn[(q, 1)], dn[(q, 2)]],
                    );
                    std::array::from_fn(|d| 0.5 * (a[d] + bb[d]))
                };
                let jb = cross3(ft.n, std::array::from_fn(|d| bo[(q, d)] - bn[(q, d)]));
                acc -= w * dot(vxd_avg, jb);
            }
        }
        kappa * acc
    }

    // ------------------------------------------------------------------
    // Mean-value constraints and load vectors.
    // ------------------------------------------------------------------

    /// Border the system with the zero-mean pressure constraint: a column
    /// of element integrals against the pressure test space and its
    /// transposed row.
    pub fn assemble_mean_pressure(&self, out: &mut TripletBuffer) {
        let vol = &self.tabs.vol;
        let mq = vol.phi_q.ncols();
        let lay = self.layout;
        let mu = lay.mu_p();
        for e in 0..self.n_elems() {
            let det = self.mesh.geom[e].det;
            for i in 0..mq {
                let v: f64 = (0..vol.npts())
                    .map(|q| vol.rule.weights[q] * det * vol.phi_q[(q, i)])
                    .sum();
                if v != 0.0 {
                    out.push(lay.p_dof(e, i), mu, v);
                    out.push(mu, lay.p_dof(e, i), v);
                }
            }
        }
    }

    /// Border the system with the zero-mean multiplier constraint (second
    /// boundary family only; no-op otherwise).
    pub fn assemble_mean_multiplier(&self, out: &mut TripletBuffer) {
        let Some(mu) = self.layout.mu_r() else { return };
        let vol = &self.tabs.vol;
        let ms = vol.phi_s.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let det = self.mesh.geom[e].det;
            for i in 0..ms {
                let v: f64 = (0..vol.npts())
                    .map(|q| vol.rule.weights[q] * det * vol.phi_s[(q, i)])
                    .sum();
                if v != 0.0 {
                    out.push(lay.r_dof(e, i), mu, v);
                    out.push(mu, lay.r_dof(e, i), v);
                }
            }
        }
    }

    /// Add the momentum load `∫ f·v` into the velocity rows of `rhs`.
    pub fn assemble_load_velocity(&self, f: &dyn Fn([f64; 3]) -> [f64; 3], rhs: &mut [f64]) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let fq = f(geom.to_phys(vol.rule.points[q]));
                for c in 0..3 {
                    let fc = w * fq[c];
                    for i in 0..m {
                        rhs[lay.u_dof(e, c, i)] += fc * vol.phi_u[(q, i)];
                    }
                }
            }
        }
    }

    /// Add the induction load `∫ g·c` into the magnetic rows of `rhs`.
    pub fn assemble_load_magnetic(&self, g: &dyn Fn([f64; 3]) -> [f64; 3], rhs: &mut [f64]) {
        let vol = &self.tabs.vol;
        let m = vol.phi_u.ncols();
        let lay = self.layout;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let gq = g(geom.to_phys(vol.rule.points[q]));
                for c in 0..3 {
                    let gc = w * gq[c];
                    for i in 0..m {
                        rhs[lay.b_dof(e, c, i)] += gc * vol.phi_u[(q, i)];
                    }
                }
            }
        }
    }

    /// `∫ f·v` for a coefficient field `v` (same quadrature as the load
    /// assembly, independent code path).
    pub fn eval_source(&self, f: &dyn Fn([f64; 3]) -> [f64; 3], v: &DgField) -> f64 {
        let vol = &self.tabs.vol;
        let mut acc = 0.0;
        for e in 0..self.n_elems() {
            let geom = &self.mesh.geom[e];
            let vv = v.eval_with_table(e, &vol.phi_u);
            for q in 0..vol.npts() {
                let w = vol.rule.weights[q] * geom.det;
                let fq = f(geom.to_phys(vol.rule.points[q]));
                for c in 0..3 {
                    acc += w * fq[c] * vv[(q, c)];
                }
            }
        }
        acc
    }
}

#[inline]
fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::super::tables::build_dg_tables;
    use super::*;
    use crate::fem_core::{
        build_dof_layout, l2_project, random_field, BasisSet, DofLayout, SchemeKind,
    };
    use crate::mesh::build_structured_tet_mesh;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        mesh: crate::mesh::TetMesh,
        layout: DgLayout,
        basis: BasisSet,
        tabs: DgTables,
    }

    fn setup(n: usize, k: usize, bc: BcType) -> Setup {
        let mesh = build_structured_tet_mesh(n).unwrap();
        let DofLayout::Dg(layout) = build_dof_layout(&mesh, k, SchemeKind::Dg, bc).unwrap()
        else {
            panic!("expected the discontinuous layout");
        };
        let basis = BasisSet::new(k + 1).unwrap();
        let tabs = build_dg_tables(&mesh, &basis, k).unwrap();
        Setup { mesh, layout, basis, tabs }
    }

    /// Quadratic form xᵀ·M·y from raw triplets.
    fn quad_form(buf: &TripletBuffer, x: &[f64], y: &[f64]) -> f64 {
        buf.entries().iter().map(|&(r, c, v)| x[r] * v * y[c]).sum()
    }

    fn project_vec(
        s: &Setup,
        f: &dyn Fn([f64; 3]) -> [f64; 3],
        degree: usize,
    ) -> DgField {
        l2_project(&s.mesh, s.basis.tet(degree), 3, 2 * degree + 2, &|x, out| {
            let v = f(x);
            out.copy_from_slice(&v);
        })
        .unwrap()
    }

    #[test]
    fn viscous_form_on_constants_reduces_to_boundary_penalty() {
        let s = setup(1, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let (nu, a0) = (0.7, 13.0);
        let c = [0.3, -0.2, 0.5];
        let u = l2_project(&s.mesh, s.basis.tet(1), 3, 2, &|_x, out| out.copy_from_slice(&c))
            .unwrap();
        let c2 = c.iter().map(|v| v * v).sum::<f64>();
        // 12 boundary triangles, each of area 1/2 and diameter √2: the
        // consistency terms vanish and only the boundary penalty remains.
        let expect = nu * a0 * 3.0 * std::f64::consts::SQRT_2 * c2;
        let direct = ops.eval_a(nu, a0, &u, &u);
        assert!((direct - expect).abs() < 1e-11 * expect.abs());
        let mut buf = TripletBuffer::new();
        ops.assemble_a(nu, a0, &mut buf);
        let x = pack_u(&s.layout, &u);
        let via_matrix = quad_form(&buf, &x, &x);
        assert!((via_matrix - expect).abs() < 1e-11 * expect.abs());
    }

    #[test]
    fn magnetic_form_on_constants_reduces_to_boundary_penalty() {
        let s = setup(1, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let (knm, m0) = (0.9, 11.0);
        let c = [0.4, 0.1, -0.3];
        let b = l2_project(&s.mesh, s.basis.tet(1), 3, 2, &|_x, out| out.copy_from_slice(&c))
            .unwrap();
        let c2: f64 = c.iter().map(|v| v * v).sum();
        // Σ over the 12 boundary triangles of |n×c|²·area/h = 4|c|²/√2.
        let expect = knm * m0 * 2.0 * std::f64::consts::SQRT_2 * c2;
        let direct = ops.eval_m(knm, m0, BcType::Type1, &b, &b);
        assert!(
            (direct - expect).abs() < 1e-11 * expect.abs(),
            "{direct} vs {expect}"
        );
        // The second family has no boundary faces and no interior jumps.
        let interior_only = ops.eval_m(knm, m0, BcType::Type2, &b, &b);
        assert!(interior_only.abs() < 1e-13);
    }

    #[test]
    fn magnetic_form_annihilates_conforming_gradients() {
        use crate::fem_core::conforming::{build_conforming_space, ConformingSpace};
        let s = setup(2, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let space: ConformingSpace = build_conforming_space(&s.mesh, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs = space.random_coeffs(1.0, true, &mut rng);
        let grad = space.grad_to_dg(&s.mesh, &coeffs, s.basis.tet(1)).unwrap();
        let val = ops.eval_m(1.3, 10.0, BcType::Type1, &grad, &grad);
        assert!(val.abs() < 1e-16, "curl-free field produced {val:e}");
    }

    #[test]
    fn divergence_form_annihilates_constant_pressures_against_linears() {
        let s = setup(1, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let q = l2_project(&s.mesh, s.basis.tet(0), 1, 2, &|_x, out| out[0] = 1.0).unwrap();
        for lin in [
            |x: [f64; 3]| [x[0], x[1], x[2]],
            |x: [f64; 3]| [x[1], x[2], x[0]],
            |x: [f64; 3]| [2.0 * x[0] - x[1], 0.5 * x[2], -x[0]],
        ] {
            let u = project_vec(&s, &lin, 1);
            let val = ops.eval_b(&u, &q);
            assert!(val.abs() < 1e-12, "divergence form gave {val:e}");
        }
    }

    #[test]
    fn divergence_form_matrix_matches_direct_evaluation() {
        let s = setup(2, 2, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ne = s.mesh.tets.len();
        let d = &s.layout.dims;
        let mut buf = TripletBuffer::new();
        ops.assemble_b(&mut buf);
        for _ in 0..5 {
            let u = random_field(2, 3, ne, d.m_k, 1.0, &mut rng);
            let q = random_field(1, 1, ne, d.m_km1, 1.0, &mut rng);
            let direct = ops.eval_b(&u, &q);
            let via = quad_form(&buf, &pack_p(&s.layout, &q), &pack_u(&s.layout, &u));
            assert!(
                (direct - via).abs() < 1e-11 * (1.0 + direct.abs()),
                "{direct} vs {via}"
            );
        }
    }

    #[test]
    fn magnetic_divergence_form_gradient_identity() {
        use crate::fem_core::conforming::build_conforming_space;
        // s = φ (conforming, degree k+1), b = ∇φ: the jump terms vanish and
        // the form equals ‖∇φ‖².
        for (bc, zero_boundary) in [(BcType::Type1, true), (BcType::Type2, false)] {
            let s = setup(2, 1, bc);
            let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
            let space = build_conforming_space(&s.mesh, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(29);
            let coeffs = space.random_coeffs(1.0, zero_boundary, &mut rng);
            let grad = space.grad_to_dg(&s.mesh, &coeffs, s.basis.tet(1)).unwrap();
            let sfield = space.to_dg(&s.mesh, &coeffs, s.basis.tet(2)).unwrap();
            let val = ops.eval_d(bc, &grad, &sfield);
            let norm2 = grad.l2_norm(&s.mesh).powi(2);
            assert!(
                (val - norm2).abs() < 1e-11 * norm2,
                "{val} vs {norm2} ({bc:?})"
            );
            // Matrix path agrees.
            let mut buf = TripletBuffer::new();
            ops.assemble_d(bc, &mut buf);
            let via = quad_form(&buf, &pack_r(&s.layout, &sfield), &pack_b(&s.layout, &grad));
            assert!((via - norm2).abs() < 1e-11 * norm2);
        }
    }

    #[test]
    fn multiplier_jump_form_vanishes_on_continuous_fields() {
        use crate::fem_core::conforming::build_conforming_space;
        for (bc, zero_boundary) in [(BcType::Type1, true), (BcType::Type2, false)] {
            let s = setup(2, 1, bc);
            let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
            let space = build_conforming_space(&s.mesh, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            let coeffs = space.random_coeffs(1.0, zero_boundary, &mut rng);
            let r = space.to_dg(&s.mesh, &coeffs, s.basis.tet(2)).unwrap();
            let val = ops.eval_j(1.0, bc, &r, &r);
            assert!(val.abs() < 1e-16, "continuous multiplier produced {val:e}");
            // And it is genuinely positive on a random discontinuous field.
            let rr = random_field(2, 1, s.mesh.tets.len(), s.layout.dims.m_kp1, 1.0, &mut rng);
            assert!(ops.eval_j(1.0, bc, &rr, &rr) > 1e-6);
        }
    }

    #[test]
    fn coupling_form_single_element_oracle() {
        let s = setup(1, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let kappa = 1.7;
        // v = e₁ on element 0 only.
        let mut v = l2_project(&s.mesh, s.basis.tet(1), 3, 2, &|_x, out| {
            out.copy_from_slice(&[1.0, 0.0, 0.0])
        })
        .unwrap();
        for e in 1..s.mesh.tets.len() {
            for c in 0..3 {
                v.comp_mut(e, c).fill(0.0);
            }
        }
        let d = project_vec(&s, &|_x| [0.0, 1.0, 0.0], 1);
        // b = (−y/2, x/2, 0) has ∇×b = e₃ and is continuous, so only the
        // volume term of element 0 survives: κ·(e₁×e₂)·e₃·|K₀| = κ|K₀|.
        let b = project_vec(&s, &|x| [-0.5 * x[1], 0.5 * x[0], 0.0], 1);
        let expect = kappa * s.mesh.geom[0].det / 6.0;
        let direct = ops.eval_c(kappa, &d, &v, &b);
        assert!(
            (direct - expect).abs() < 1e-12 * expect.abs(),
            "{direct} vs {expect}"
        );
        let mut buf = TripletBuffer::new();
        ops.assemble_c(kappa, &d, &mut buf);
        let via = quad_form(&buf, &pack_u(&s.layout, &v), &pack_b(&s.layout, &b));
        assert!((via - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn coupling_form_matrix_matches_direct_evaluation() {
        let s = setup(2, 1, BcType::Type2);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let ne = s.mesh.tets.len();
        let m = s.layout.dims.m_k;
        let dfield = random_field(1, 3, ne, m, 1.0, &mut rng);
        let mut buf = TripletBuffer::new();
        ops.assemble_c(2.3, &dfield, &mut buf);
        for _ in 0..5 {
            let v = random_field(1, 3, ne, m, 1.0, &mut rng);
            let b = random_field(1, 3, ne, m, 1.0, &mut rng);
            let direct = ops.eval_c(2.3, &dfield, &v, &b);
            let via = quad_form(&buf, &pack_u(&s.layout, &v), &pack_b(&s.layout, &b));
            assert!(
                (direct - via).abs() < 1e-10 * (1.0 + direct.abs()),
                "{direct} vs {via}"
            );
        }
    }

    #[test]
    fn convection_form_satisfies_the_jump_identity() {
        let s = setup(2, 1, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let beta = [0.4, -0.3, 0.25];
        let mut buf = TripletBuffer::new();
        ops.assemble_o(&beta, &mut buf);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = random_field(1, 3, s.mesh.tets.len(), s.layout.dims.m_k, 1.0, &mut rng);
            let x = pack_u(&s.layout, &v);
            let quad = quad_form(&buf, &x, &x);
            let direct = ops.eval_o(&beta, &v, &v);
            // Independent face-loop evaluation of
            // ½ Σ_F ∫ |β·n| |jump v|².
            let mut ident = 0.0;
            for ft in &s.tabs.faces {
                let bn: f64 = beta
                    .iter()
                    .zip(ft.n.iter())
                    .map(|(a, b)| a * b)
                    .sum();
                let vo = v.eval_with_table(ft.own.elem, &ft.own.phi_u);
                match &ft.nbr {
                    Some(nbr) => {
                        let vn = v.eval_with_table(nbr.elem, &nbr.phi_u);
                        for q in 0..ft.npts() {
                            let j2: f64 = (0..3)
                                .map(|c| (vo[(q, c)] - vn[(q, c)]).powi(2))
                                .sum();
                            ident += 0.5 * ft.w[q] * bn.abs() * j2;
                        }
                    }
                    None => {
                        for q in 0..ft.npts() {
                            let j2: f64 = (0..3).map(|c| vo[(q, c)].powi(2)).sum();
                            ident += 0.5 * ft.w[q] * bn.abs() * j2;
                        }
                    }
                }
            }
            let scale = 1.0 + ident.abs();
            assert!((quad - ident).abs() < 1e-11 * scale, "{quad} vs {ident}");
            assert!((direct - ident).abs() < 1e-11 * scale);
            assert!(direct >= -1e-12 * scale);
        }
    }

    #[test]
    fn symmetric_blocks_are_symmetric() {
        for bc in [BcType::Type1, BcType::Type2] {
            let s = setup(1, 1, bc);
            let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
            let mut a = TripletBuffer::new();
            ops.assemble_a(1.3, 17.0, &mut a);
            let mut m = TripletBuffer::new();
            ops.assemble_m(0.8, 9.0, bc, &mut m);
            let mut j = TripletBuffer::new();
            ops.assemble_j(1.9, bc, &mut j);
            for buf in [&a, &m, &j] {
                let n = s.layout.total;
                let da = crate::linalg::to_csr(buf, n, n).unwrap().to_dense();
                let asym = (&da - da.transpose()).abs().max();
                let scale = da.abs().max().max(1.0);
                assert!(asym < 1e-12 * scale, "asymmetry {asym:e}");
            }
        }
    }

    #[test]
    fn viscous_form_matrix_matches_direct_on_random_fields() {
        let s = setup(2, 2, BcType::Type1);
        let ops = DgOps::new(&s.mesh, &s.layout, &s.tabs);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = TripletBuffer::new();
        ops.assemble_a(0.85, 12.0, &mut a);
        let mut mm = TripletBuffer::new();
        ops.assemble_m(1.45, 8.0, BcType::Type1, &mut mm);
        let mut jj = TripletBuffer::new();
        ops.assemble_j(0.6, BcType::Type1, &mut jj);
        for _ in 0..4 {
            let u = random_field(2, 3, s.mesh.tets.len(), s.layout.dims.m_k, 1.0, &mut rng);
            let v = random_field(2, 3, s.mesh.tets.len(), s.layout.dims.m_k, 1.0, &mut rng);
            let direct = ops.eval_a(0.85, 12.0, &u, &v);
            let via = quad_form(&a, &pack_u(&s.layout, &v), &pack_u(&s.layout, &u));
            assert!((direct - via).abs() < 1e-10 * (1.0 + direct.abs()));
            let direct_m = ops.eval_m(1.45, 8.0, BcType::Type1, &u, &v);
            let via_m = quad_form(&mm, &pack_b(&s.layout, &v), &pack_b(&s.layout, &u));
            assert!((direct_m - via_m).abs() < 1e-10 * (1.0 + direct_m.abs()));
            let r1 = random_field(3, 1, s.mesh.tets.len(), s.layout.dims.m_kp1, 1.0, &mut rng);
            let r2 = random_field(3, 1, s.mesh.tets.len(), s.layout.dims.m_kp1, 1.0, &mut rng);
            let direct_j = ops.eval_j(0.6, BcType::Type1, &r1, &r2);
            let via_j = quad_form(&jj, &pack_r(&s.layout, &r2), &pack_r(&s.layout, &r1));
            assert!((direct_j - via_j).abs() < 1e-10 * (1.0 + direct_j.abs()));
        }
    }

    // -- test-local scatter helpers ------------------------------------

    fn pack_u(lay: &DgLayout, f: &DgField) -> Vec<f64> {
        let mut x = vec![0.0; lay.total];
        for e in 0..lay.n_elems {
            for c in 0..3 {
                for m in 0..lay.dims.m_k {
                    x[lay.u_dof(e, c, m)] = f.coeffs[f.idx(e, c, m)];
                }
            }
        }
        x
    }

    fn pack_b(lay: &DgLayout, f: &DgField) -> Vec<f64> {
        let mut x = vec![0.0; lay.total];
        for e in 0..lay.n_elems {
            for c in 0..3 {
                for m in 0..lay.dims.m_k {
                    x[lay.b_dof(e, c, m)] = f.coeffs[f.idx(e, c, m)];
                }
            }
        }
        x
    }

    fn pack_p(lay: &DgLayout, f: &DgField) -> Vec<f64> {
        let mut x = vec![0.0; lay.total];
        for e in 0..lay.n_elems {
            for m in 0..lay.dims.m_km1 {
                x[lay.p_dof(e, m)] = f.coeffs[f.idx(e, 0, m)];
            }
        }
        x
    }

    fn pack_r(lay: &DgLayout, f: &DgField) -> Vec<f64> {
        let mut x = vec![0.0; lay.total];
        for e in 0..lay.n_elems {
            for m in 0..lay.dims.m_kp1 {
                x[lay.r_dof(e, m)] = f.coeffs[f.idx(e, 0, m)];
            }
        }
        x
    }
}
