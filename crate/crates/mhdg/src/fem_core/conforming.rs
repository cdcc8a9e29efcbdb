//! Continuous (H¹-conforming) scalar lattice spaces and helpers built on
//! top of the broken spaces: discrete Laplacian solves for gradient
//! corrections, first-degree edge-moment interpolation into the largest
//! curl-conforming subspace of the broken vector space, and conversions of
//! conforming fields into broken modal coefficients.
//!
//! Global continuity is enforced topologically: each lattice node of each
//! element is classified by its barycentric support (vertex / edge / face /
//! interior) and keyed by globally sorted vertex ids, so shared nodes get
//! one global id regardless of element orientation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fem_core::basis::{lattice_nodes, make_scalar_basis, BasisFamily, ScalarBasis};
use crate::fem_core::fields::DgField;
use crate::fem_core::quad::{make_quadrature, Shape};
use crate::linalg::{factorize, to_csr, TripletBuffer};
use crate::mesh::TetMesh;

/// Key identifying a global lattice node by mesh topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    /// A mesh vertex.
    Vertex(usize),
    /// Interior node of the edge (g0, g1), g0 < g1, at barycentric index
    /// `a` (in units of 1/m) attached to g0.
    Edge(usize, usize, usize),
    /// Interior node of the face (g0, g1, g2) sorted, with barycentric
    /// indices (a0, a1) attached to g0, g1.
    Face(usize, usize, usize, usize, usize),
    /// Interior node `idx` of element `e` (never shared).
    Interior(usize, usize),
}

/// A continuous piecewise-P_m scalar space on the mesh.
pub struct ConformingSpace {
    /// Polynomial degree m ≥ 1.
    pub degree: usize,
    /// Number of global nodes.
    pub n_nodes: usize,
    /// Per element: local lattice node index → global node id.
    pub elem_nodes: Vec<Vec<usize>>,
    /// Whether a global node lies on ∂Ω.
    pub is_boundary: Vec<bool>,
    /// Nodal reference basis of degree m (tet).
    pub basis: ScalarBasis,
}

/// Barycentric indices (in units of 1/m) of the lattice nodes of degree m,
/// in the same order as [`lattice_nodes`]: α = (m−i−j−l, i, j, l) over the
/// reference vertices v0..v3.
fn lattice_barycentric(m: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for i in 0..=m {
        for j in 0..=(m - i) {
            for l in 0..=(m - i - j) {
                out.push([m - i - j - l, i, j, l]);
            }
        }
    }
    out
}

/// Build the continuous degree-`m` lattice space on `mesh`.
pub fn build_conforming_space(mesh: &TetMesh, m: usize) -> Result<ConformingSpace> {
    if m == 0 {
        return Err(Error::Config("conforming spaces need degree ≥ 1".into()));
    }
    let basis = make_scalar_basis(Shape::Tet, m, BasisFamily::Nodal)?;
    let bary = lattice_barycentric(m);
    let mut keys: BTreeMap<NodeKey, usize> = BTreeMap::new();
    let mut elem_nodes: Vec<Vec<usize>> = Vec::with_capacity(mesh.n_elems());

    // First pass: assign provisional ids in BTreeMap order later; collect
    // keys per element now.
    let mut elem_keys: Vec<Vec<NodeKey>> = Vec::with_capacity(mesh.n_elems());
    for (e, tet) in mesh.tets.iter().enumerate() {
        let mut local = Vec::with_capacity(bary.len());
        for (li, a) in bary.iter().enumerate() {
            let support: Vec<usize> = (0..4).filter(|&v| a[v] > 0).collect();
            let key = match support.len() {
                1 => NodeKey::Vertex(tet[support[0]]),
                2 => {
                    let (va, vb) = (tet[support[0]], tet[support[1]]);
                    let (aa, ab) = (a[support[0]], a[support[1]]);
                    if va < vb {
                        NodeKey::Edge(va, vb, aa)
                    } else {
                        NodeKey::Edge(vb, va, ab)
                    }
                }
                3 => {
                    let mut trip: Vec<(usize, usize)> =
                        support.iter().map(|&v| (tet[v], a[v])).collect();
                    trip.sort_unstable();
                    NodeKey::Face(trip[0].0, trip[1].0, trip[2].0, trip[0].1, trip[1].1)
                }
                _ => NodeKey::Interior(e, li),
            };
            keys.entry(key).or_insert(0);
            local.push(key);
        }
        elem_keys.push(local);
    }
    // Deterministic global numbering: BTreeMap order.
    for (i, (_, v)) in keys.iter_mut().enumerate() {
        *v = i;
    }
    let n_nodes = keys.len();
    for local in &elem_keys {
        elem_nodes.push(local.iter().map(|k| keys[k]).collect());
    }

    // Boundary marking: a node lies on ∂Ω iff some boundary face contains
    // it, i.e. its barycentric index opposite that face's local id is 0.
    let mut is_boundary = vec![false; n_nodes];
    for face in &mesh.faces {
        if !face.is_boundary() {
            continue;
        }
        let e = face.owner;
        let opp = face.owner_local;
        for (li, a) in bary.iter().enumerate() {
            if a[opp] == 0 {
                is_boundary[elem_nodes[e][li]] = true;
            }
        }
    }

    Ok(ConformingSpace { degree: m, n_nodes, elem_nodes, is_boundary, basis })
}

impl ConformingSpace {
    /// Evaluate a nodal coefficient vector on element `e` at reference
    /// points, returning values (npts).
    pub fn eval(&self, coeffs: &[f64], e: usize, pts: &[[f64; 3]]) -> Vec<f64> {
        let phi = self.basis.eval(pts);
        let nodes = &self.elem_nodes[e];
        (0..pts.len())
            .map(|q| nodes.iter().enumerate().map(|(i, &g)| coeffs[g] * phi[(q, i)]).sum())
            .collect()
    }

    /// Convert nodal coefficients into broken modal coefficients of the
    /// same degree (exact: the field is elementwise polynomial).
    pub fn to_dg(&self, mesh: &TetMesh, coeffs: &[f64], modal: &ScalarBasis) -> Result<DgField> {
        assert_eq!(modal.degree, self.degree);
        let rule = make_quadrature(Shape::Tet, 2 * self.degree)?;
        let phi_nodal = self.basis.eval(&rule.points);
        let phi_modal = modal.eval(&rule.points);
        let mut out = DgField::zeros(self.degree, 1, mesh.n_elems(), modal.dim());
        for e in 0..mesh.n_elems() {
            let nodes = &self.elem_nodes[e];
            let slice = out.comp_mut(e, 0);
            for (q, &w) in rule.weights.iter().enumerate() {
                let mut v = 0.0;
                for (i, &g) in nodes.iter().enumerate() {
                    v += coeffs[g] * phi_nodal[(q, i)];
                }
                for (i, s) in slice.iter_mut().enumerate() {
                    *s += w * v * phi_modal[(q, i)];
                }
            }
        }
        Ok(out)
    }

    /// Elementwise gradient of a nodal coefficient vector, projected
    /// exactly into the broken modal space of degree m−1.
    pub fn grad_to_dg(
        &self,
        mesh: &TetMesh,
        coeffs: &[f64],
        modal_km1: &ScalarBasis,
    ) -> Result<DgField> {
        assert_eq!(modal_km1.degree + 1, self.degree);
        let rule = make_quadrature(Shape::Tet, 2 * self.degree)?;
        let grad_nodal = self.basis.eval_grad(&rule.points);
        let phi_modal = modal_km1.eval(&rule.points);
        let mut out = DgField::zeros(modal_km1.degree, 3, mesh.n_elems(), modal_km1.dim());
        for e in 0..mesh.n_elems() {
            let nodes = &self.elem_nodes[e];
            let geom = &mesh.geom[e];
            for (q, &w) in rule.weights.iter().enumerate() {
                let mut gref = [0.0; 3];
                for (i, &g) in nodes.iter().enumerate() {
                    for d in 0..3 {
                        gref[d] += coeffs[g] * grad_nodal[d][(q, i)];
                    }
                }
                let gphys = geom.grad_to_phys(gref);
                for c in 0..3 {
                    let slice = out.comp_mut(e, c);
                    for (i, s) in slice.iter_mut().enumerate() {
                        *s += w * gphys[c] * phi_modal[(q, i)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Random nodal coefficients; boundary nodes zeroed when `zero_bdry`.
    pub fn random_coeffs<R: Rng>(&self, scale: f64, zero_bdry: bool, rng: &mut R) -> Vec<f64> {
        let mut c: Vec<f64> = (0..self.n_nodes).map(|_| rng.gen_range(-scale..=scale)).collect();
        if zero_bdry {
            for (i, b) in self.is_boundary.iter().enumerate() {
                if *b {
                    c[i] = 0.0;
                }
            }
        }
        c
    }
}

/// Boundary handling for the conforming Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceBc {
    /// Homogeneous Dirichlet: boundary nodes eliminated.
    Dirichlet,
    /// Pure Neumann with the mean pinned by a bordered multiplier.
    NeumannMeanZero,
}

/// Solve (∇φ, ∇s) = (b₀, ∇s) for φ in the conforming space, where `b0` is
/// a broken vector field of any degree with modal basis `b0_basis`.
/// Returns the nodal coefficients of φ (zero on ∂Ω for Dirichlet).
pub fn solve_gradient_correction(
    mesh: &TetMesh,
    space: &ConformingSpace,
    b0: &DgField,
    b0_basis: &ScalarBasis,
    bc: LaplaceBc,
) -> Result<Vec<f64>> {
    let m = space.degree;
    let rule = make_quadrature(Shape::Tet, 2 * m)?;
    let grad_nodal = space.basis.eval_grad(&rule.points);
    let phi_b0 = b0_basis.eval(&rule.points);
    let nloc = space.basis.dim();

    // Free-node numbering.
    let free: Vec<Option<usize>> = {
        let mut idx = 0;
        (0..space.n_nodes)
            .map(|i| {
                if bc == LaplaceBc::Dirichlet && space.is_boundary[i] {
                    None
                } else {
                    let j = idx;
                    idx += 1;
                    Some(j)
                }
            })
            .collect()
    };
    let n_free = free.iter().filter(|f| f.is_some()).count();
    let bordered = bc == LaplaceBc::NeumannMeanZero;
    let dim = n_free + usize::from(bordered);

    let mut trip = TripletBuffer::new();
    let mut rhs = vec![0.0; dim];
    // Node weights for the mean constraint: w_i = ∫_Ω φ_i.
    let mut node_weight = vec![0.0; space.n_nodes];
    let phi_nodal = space.basis.eval(&rule.points);

    for e in 0..mesh.n_elems() {
        let geom = &mesh.geom[e];
        let det = geom.det;
        let nodes = &space.elem_nodes[e];
        // Physical gradients of every local basis function at every point.
        let mut gp = vec![[0.0; 3]; rule.points.len() * nloc];
        for q in 0..rule.points.len() {
            for i in 0..nloc {
                let gref =
                    [grad_nodal[0][(q, i)], grad_nodal[1][(q, i)], grad_nodal[2][(q, i)]];
                gp[q * nloc + i] = geom.grad_to_phys(gref);
            }
        }
        // b₀ values at the points.
        let b0_vals = b0.eval_with_table(e, &phi_b0);
        for (q, &w) in rule.weights.iter().enumerate() {
            let wq = w * det;
            for i in 0..nloc {
                let gi = gp[q * nloc + i];
                let Some(ri) = free[nodes[i]] else { continue };
                // Stiffness.
                for j in 0..nloc {
                    if let Some(cj) = free[nodes[j]] {
                        let gj = gp[q * nloc + j];
                        trip.push(ri, cj, wq * (gi[0] * gj[0] + gi[1] * gj[1] + gi[2] * gj[2]));
                    }
                }
                // Load: (b₀, ∇φ_i).
                rhs[ri] += wq
                    * (b0_vals[(q, 0)] * gi[0] + b0_vals[(q, 1)] * gi[1] + b0_vals[(q, 2)] * gi[2]);
            }
            if bordered {
                for i in 0..nloc {
                    node_weight[nodes[i]] += wq * phi_nodal[(q, i)];
                }
            }
        }
    }
    if bordered {
        let mu = n_free;
        for (i, f) in free.iter().enumerate() {
            if let Some(ri) = f {
                trip.push(*ri, mu, node_weight[i]);
                trip.push(mu, *ri, node_weight[i]);
            }
        }
    }
    let a = to_csr(&trip, dim, dim)?;
    let fact = factorize(&a)?;
    let sol = fact.solve(&rhs);
    let mut coeffs = vec![0.0; space.n_nodes];
    for (i, f) in free.iter().enumerate() {
        if let Some(ri) = f {
            coeffs[i] = sol[*ri];
        }
    }
    Ok(coeffs)
}

/// First-degree curl-conforming interpolation: edge moments
/// ∫_e (c·t) q ds for q ∈ {1, s} on every mesh edge determine a unique
/// elementwise-P₁ tangentially continuous vector field. `c` is evaluated
/// at physical points. Returns broken modal coefficients of degree 1.
pub fn edge_interpolate_p1(
    mesh: &TetMesh,
    c: &dyn Fn([f64; 3]) -> [f64; 3],
    modal_p1: &ScalarBasis,
) -> Result<DgField> {
    assert_eq!(modal_p1.degree, 1);
    // Global edges, deterministically ordered.
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for tet in &mesh.tets {
        for a in 0..4 {
            for b in (a + 1)..4 {
                let key = (tet[a].min(tet[b]), tet[a].max(tet[b]));
                let next = edges.len();
                edges.entry(key).or_insert(next);
            }
        }
    }
    // Edge moments with 3-point Gauss (exact to degree 5 on the edge).
    let gauss = [
        (0.5 - (0.6f64).sqrt() / 2.0, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + (0.6f64).sqrt() / 2.0, 5.0 / 18.0),
    ];
    let mut moments = vec![[0.0; 2]; edges.len()];
    for (&(va, vb), &id) in &edges {
        let pa = mesh.vertices[va];
        let pb = mesh.vertices[vb];
        let tang = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        for &(s, w) in &gauss {
            let x = [
                pa[0] + s * tang[0],
                pa[1] + s * tang[1],
                pa[2] + s * tang[2],
            ];
            let cv = c(x);
            // Weight absorbs |e| via the unnormalized tangent.
            let ct = cv[0] * tang[0] + cv[1] * tang[1] + cv[2] * tang[2];
            moments[id][0] += w * ct;
            moments[id][1] += w * ct * s;
        }
    }
    // Per element: solve the 12×12 system expressing the same moments of a
    // P₁ vector field (modal coefficients, component-major).
    let nm = modal_p1.dim(); // 4
    let mut out = DgField::zeros(1, 3, mesh.n_elems(), nm);
    for (e, tet) in mesh.tets.iter().enumerate() {
        let geom = &mesh.geom[e];
        let mut mat = DMatrix::zeros(12, 12);
        let mut rhs = nalgebra::DVector::zeros(12);
        let mut row = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                let (va, vb) = (tet[a], tet[b]);
                let key = (va.min(vb), va.max(vb));
                let flip = va > vb; // global orientation: small → large id
                let id = edges[&key];
                let (ga, gb) = if flip { (vb, va) } else { (va, vb) };
                let pa = mesh.vertices[ga];
                let pb = mesh.vertices[gb];
                let tang = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
                for (mi, &(s, w)) in gauss.iter().enumerate() {
                    let _ = mi;
                    let x = [
                        pa[0] + s * tang[0],
                        pa[1] + s * tang[1],
                        pa[2] + s * tang[2],
                    ];
                    let xi = geom.to_ref(x);
                    let phi = modal_p1.eval(&[xi]);
                    for comp in 0..3 {
                        for m in 0..nm {
                            let col = comp * nm + m;
                            let val = w * phi[(0, m)] * tang[comp];
                            mat[(row, col)] += val;
                            mat[(row + 1, col)] += val * s;
                        }
                    }
                }
                rhs[row] = moments[id][0];
                rhs[row + 1] = moments[id][1];
                row += 2;
            }
        }
        let lu = mat.lu();
        let sol = lu.solve(&rhs).ok_or_else(|| {
            Error::Linalg(format!("edge-moment interpolation system singular on element {e}"))
        })?;
        for comp in 0..3 {
            let slice = out.comp_mut(e, comp);
            for m in 0..nm {
                slice[m] = sol[comp * nm + m];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem_core::fields::BasisSet;
    use crate::mesh::build_structured_tet_mesh;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent node-count oracle for a structured mesh of the cube:
    /// continuous P_m has (m·n+1)³ − extra edge/face nodes... counted
    /// directly by the known simplicial-lattice formula: the Kuhn
    /// subdivision of the cube into 6 tets has conforming P_m dof equal to
    /// the full (mn+1)³ grid plus interior diagonal nodes. Rather than a
    /// closed form, we verify continuity pointwise below and check counts
    /// only for degree 1 (vertices of the mesh).
    #[test]
    fn degree_one_space_matches_mesh_vertices() {
        for n in [1usize, 2] {
            let mesh = build_structured_tet_mesh(n).unwrap();
            let space = build_conforming_space(&mesh, 1).unwrap();
            assert_eq!(space.n_nodes, mesh.vertices.len());
            // The structured mesh uses only the (n+1)³ grid, so the
            // interior node count is (n−1)³.
            let n_interior = space.is_boundary.iter().filter(|b| !**b).count();
            assert_eq!(n_interior, (n - 1).pow(3));
        }
    }

    #[test]
    fn fields_are_continuous_across_faces() {
        let mesh = build_structured_tet_mesh(2).unwrap();
        for m in [1usize, 2, 3] {
            let space = build_conforming_space(&mesh, m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let coeffs = space.random_coeffs(1.0, false, &mut rng);
            // Check value agreement at points on interior faces.
            for face in mesh.faces.iter().filter(|f| !f.is_boundary()) {
                let pts2d = [[0.3, 0.3], [0.1, 0.6], [0.5, 0.25]];
                for p in pts2d {
                    let x = face_point(&mesh, face, p);
                    let e0 = face.owner;
                    let e1 = face.neighbor.unwrap();
                    let v0 = space.eval(&coeffs, e0, &[mesh.geom[e0].to_ref(x)])[0];
                    let v1 = space.eval(&coeffs, e1, &[mesh.geom[e1].to_ref(x)])[0];
                    assert!(
                        (v0 - v1).abs() < 1e-10,
                        "m={m}: discontinuity {v0} vs {v1}"
                    );
                }
            }
        }
    }

    fn face_point(mesh: &TetMesh, face: &crate::mesh::Face, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = face.verts;
        let (va, vb, vc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let mut x = [0.0; 3];
        for d in 0..3 {
            x[d] = va[d] + p[0] * (vb[d] - va[d]) + p[1] * (vc[d] - va[d]);
        }
        x
    }

    #[test]
    fn boundary_marking_matches_geometry() {
        let mesh = build_structured_tet_mesh(2).unwrap();
        let space = build_conforming_space(&mesh, 2).unwrap();
        // Reconstruct node positions and compare against the cube boundary.
        let bary = lattice_barycentric(2);
        let nodes_ref = lattice_nodes(Shape::Tet, 2);
        let _ = bary;
        for e in 0..mesh.n_elems() {
            for (li, xi) in nodes_ref.iter().enumerate() {
                let x = mesh.geom[e].to_phys(*xi);
                let on_bdry = x.iter().any(|&c| c.abs() < 1e-12 || (c - 1.0).abs() < 1e-12);
                let g = space.elem_nodes[e][li];
                assert_eq!(
                    space.is_boundary[g], on_bdry,
                    "node at {x:?} marked {}",
                    space.is_boundary[g]
                );
            }
        }
    }

    #[test]
    fn dirichlet_laplacian_reproduces_polynomial_data() {
        // With b₀ = ∇φ* for a conforming φ* vanishing on ∂Ω, the
        // correction recovers φ* exactly (both sides in the same space).
        let mesh = build_structured_tet_mesh(2).unwrap();
        let space = build_conforming_space(&mesh, 2).unwrap();
        let bset = BasisSet::new(2).unwrap();
        // φ*(x) nodal interpolant of x(1−x)y(1−y)z(1−z) is NOT in P₂;
        // instead take φ* as random conforming coefficients zeroed on ∂Ω.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let star = space.random_coeffs(1.0, true, &mut rng);
        let b0 = space.grad_to_dg(&mesh, &star, bset.tet(1)).unwrap();
        let got = solve_gradient_correction(&mesh, &space, &b0, bset.tet(1), LaplaceBc::Dirichlet)
            .unwrap();
        for (a, b) in star.iter().zip(&got) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn neumann_laplacian_kills_gradient_part() {
        // b₀ = ∇φ* + w with w ⟂ gradients would be ideal; here use b₀ =
        // ∇φ* (φ* random, nonzero on ∂Ω): the corrected field b₀ − ∇φ_h
        // must be orthogonal to all conforming gradients, i.e. ≈ 0.
        let mesh = build_structured_tet_mesh(1).unwrap();
        let space = build_conforming_space(&mesh, 2).unwrap();
        let bset = BasisSet::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let star = space.random_coeffs(1.0, false, &mut rng);
        let b0 = space.grad_to_dg(&mesh, &star, bset.tet(1)).unwrap();
        let phi = solve_gradient_correction(
            &mesh,
            &space,
            &b0,
            bset.tet(1),
            LaplaceBc::NeumannMeanZero,
        )
        .unwrap();
        let mut corrected = b0.clone();
        let grad_phi = space.grad_to_dg(&mesh, &phi, bset.tet(1)).unwrap();
        corrected.axpy(-1.0, &grad_phi);
        let norm = corrected.l2_norm(&mesh);
        let scale = b0.l2_norm(&mesh);
        assert!(norm < 1e-9 * scale, "residual {norm} vs scale {scale}");
    }

    #[test]
    fn edge_interpolation_reproduces_linear_fields() {
        let mesh = build_structured_tet_mesh(2).unwrap();
        let bset = BasisSet::new(1).unwrap();
        let c = |x: [f64; 3]| {
            [
                1.0 + 2.0 * x[1] - x[2],
                -0.5 + x[0] + 3.0 * x[2],
                2.0 - x[0] + 0.25 * x[1],
            ]
        };
        let field = edge_interpolate_p1(&mesh, &c, bset.tet(1)).unwrap();
        let pts = [[0.2, 0.3, 0.1], [0.25, 0.25, 0.25]];
        for e in 0..mesh.n_elems() {
            let vals = field.eval(e, bset.tet(1), &pts);
            for (q, pt) in pts.iter().enumerate() {
                let x = mesh.geom[e].to_phys(*pt);
                let want = c(x);
                for comp in 0..3 {
                    assert!(
                        (vals[(q, comp)] - want[comp]).abs() < 1e-10,
                        "e={e} comp={comp}"
                    );
                }
            }
        }
    }

    #[test]
    fn edge_interpolation_is_tangentially_continuous() {
        let mesh = build_structured_tet_mesh(1).unwrap();
        let bset = BasisSet::new(1).unwrap();
        // A deliberately non-polynomial field.
        let c = |x: [f64; 3]| {
            [
                (std::f64::consts::PI * x[1]).sin(),
                x[0] * x[2],
                (x[0] - x[1]).cos(),
            ]
        };
        let field = edge_interpolate_p1(&mesh, &c, bset.tet(1)).unwrap();
        for face in mesh.faces.iter().filter(|f| !f.is_boundary()) {
            let n = face.normal;
            for p in [[0.25, 0.25], [0.5, 0.3], [0.2, 0.6]] {
                let x = face_point(&mesh, face, p);
                let e0 = face.owner;
                let e1 = face.neighbor.unwrap();
                let v0 = field.eval(e0, bset.tet(1), &[mesh.geom[e0].to_ref(x)]);
                let v1 = field.eval(e1, bset.tet(1), &[mesh.geom[e1].to_ref(x)]);
                // Tangential part: v − (v·n)n must agree.
                let mut diff = [0.0; 3];
                for d in 0..3 {
                    diff[d] = v0[(0, d)] - v1[(0, d)];
                }
                let dn = diff[0] * n[0] + diff[1] * n[1] + diff[2] * n[2];
                let tang: f64 = (0..3).map(|d| (diff[d] - dn * n[d]).powi(2)).sum();
                assert!(tang.sqrt() < 1e-10, "tangential jump {}", tang.sqrt());
            }
        }
    }
}
