//! Polynomial bases on the reference tetrahedron and triangle.
//!
//! Two families are provided for every degree:
//!
//! * **orthonormal** (modal): monomials orthonormalized against the exact
//!   L² inner product of the reference element by twice-reorthogonalized
//!   modified Gram–Schmidt, using a quadrature rule exact for the products
//!   involved. Local mass matrices under these bases are identity matrices
//!   up to the element Jacobian, which keeps every local solve
//!   well-conditioned through the degree cap.
//! * **nodal** (Lagrange on the equispaced lattice): used where point
//!   values are the natural degrees of freedom (conforming subspaces,
//!   diagnostics).
//!
//! Bases are stored as coefficient matrices over a fixed graded monomial
//! order, so they can be evaluated at arbitrary reference points — in
//! particular at face quadrature points pulled back from either side of a
//! face.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
pub use crate::fem_core::quad::Shape;
use crate::fem_core::quad::{make_quadrature, MAX_DEGREE};

/// Largest polynomial degree a scalar basis is built for. The FE degree is
/// capped at 4; the pseudo-pressure space and conforming diagnostics use
/// degree k+1, hence 5.
pub const MAX_BASIS_DEGREE: usize = 5;

/// Basis family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    /// Lagrange basis on the equispaced degree-k lattice.
    Nodal,
    /// L²(reference element)-orthonormal modal basis.
    Orthonormal,
}

/// Dimension of P_k on the given shape.
pub fn space_dim(shape: Shape, k: usize) -> usize {
    match shape {
        Shape::Tet => (k + 1) * (k + 2) * (k + 3) / 6,
        Shape::Tri => (k + 1) * (k + 2) / 2,
    }
}

/// The graded monomial exponent list for P_k on `shape` (z-exponent 0 on
/// triangles). Deterministic order: by total degree, then lexicographic in
/// (x-exponent, y-exponent) descending.
pub fn monomial_exponents(shape: Shape, k: usize) -> Vec<[u32; 3]> {
    let mut monos = Vec::with_capacity(space_dim(shape, k));
    for t in 0..=k as u32 {
        for a in (0..=t).rev() {
            match shape {
                Shape::Tet => {
                    for b in (0..=(t - a)).rev() {
                        monos.push([a, b, t - a - b]);
                    }
                }
                Shape::Tri => monos.push([a, t - a, 0]),
            }
        }
    }
    monos
}

/// A polynomial basis for P_k on a reference simplex, stored as
/// coefficients over the graded monomial list.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    /// Reference shape.
    pub shape: Shape,
    /// Polynomial degree k.
    pub degree: usize,
    /// Which family this basis belongs to.
    pub family: BasisFamily,
    monos: Vec<[u32; 3]>,
    /// `coeff[(m, j)]`: coefficient of monomial m in basis function j.
    coeff: DMatrix<f64>,
    /// Interpolation nodes (nodal family only).
    nodes: Option<Vec<[f64; 3]>>,
}

impl ScalarBasis {
    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.coeff.ncols()
    }

    /// Interpolation nodes of the nodal family.
    pub fn nodes(&self) -> Option<&[[f64; 3]]> {
        self.nodes.as_deref()
    }

    /// Evaluate every basis function at the given reference points.
    /// Returns an `(npts × dim)` matrix.
    pub fn eval(&self, points: &[[f64; 3]]) -> DMatrix<f64> {
        let vmono = eval_monomials(&self.monos, self.degree, points);
        &vmono * &self.coeff
    }

    /// Evaluate all first partial derivatives at the given reference
    /// points. Returns one `(npts × dim)` matrix per direction.
    pub fn eval_grad(&self, points: &[[f64; 3]]) -> [DMatrix<f64>; 3] {
        let gmono = eval_monomial_gradients(&self.monos, self.degree, points);
        [&gmono[0] * &self.coeff, &gmono[1] * &self.coeff, &gmono[2] * &self.coeff]
    }
}

/// Evaluate the monomial list at points; `(npts × nmono)`.
fn eval_monomials(monos: &[[u32; 3]], degree: usize, points: &[[f64; 3]]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(points.len(), monos.len());
    let mut pw = PowerTable::new(degree);
    for (ip, p) in points.iter().enumerate() {
        pw.fill(p);
        for (im, m) in monos.iter().enumerate() {
            out[(ip, im)] = pw.x[m[0] as usize] * pw.y[m[1] as usize] * pw.z[m[2] as usize];
        }
    }
    out
}

/// Evaluate the gradient of each monomial at points.
fn eval_monomial_gradients(
    monos: &[[u32; 3]],
    degree: usize,
    points: &[[f64; 3]],
) -> [DMatrix<f64>; 3] {
    let mut dx = DMatrix::zeros(points.len(), monos.len());
    let mut dy = DMatrix::zeros(points.len(), monos.len());
    let mut dz = DMatrix::zeros(points.len(), monos.len());
    let mut pw = PowerTable::new(degree);
    for (ip, p) in points.iter().enumerate() {
        pw.fill(p);
        for (im, &[a, b, c]) in monos.iter().enumerate() {
            let (a, b, c) = (a as usize, b as usize, c as usize);
            if a > 0 {
                dx[(ip, im)] = a as f64 * pw.x[a - 1] * pw.y[b] * pw.z[c];
            }
            if b > 0 {
                dy[(ip, im)] = b as f64 * pw.x[a] * pw.y[b - 1] * pw.z[c];
            }
            if c > 0 {
                dz[(ip, im)] = c as f64 * pw.x[a] * pw.y[b] * pw.z[c - 1];
            }
        }
    }
    [dx, dy, dz]
}

/// Cached powers of a point's coordinates up to a fixed degree.
struct PowerTable {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl PowerTable {
    fn new(degree: usize) -> Self {
        PowerTable { x: vec![1.0; degree + 1], y: vec![1.0; degree + 1], z: vec![1.0; degree + 1] }
    }

    fn fill(&mut self, p: &[f64; 3]) {
        for i in 1..self.x.len() {
            self.x[i] = self.x[i - 1] * p[0];
            self.y[i] = self.y[i - 1] * p[1];
            self.z[i] = self.z[i - 1] * p[2];
        }
    }
}

/// Equispaced interpolation lattice for P_k (centroid for k = 0).
pub fn lattice_nodes(shape: Shape, k: usize) -> Vec<[f64; 3]> {
    if k == 0 {
        return match shape {
            Shape::Tet => vec![[0.25, 0.25, 0.25]],
            Shape::Tri => vec![[1.0 / 3.0, 1.0 / 3.0, 0.0]],
        };
    }
    let kf = k as f64;
    let mut nodes = Vec::with_capacity(space_dim(shape, k));
    match shape {
        Shape::Tet => {
            // Lattice multi-indices in a fixed deterministic order.
            for i in 0..=k {
                for j in 0..=(k - i) {
                    for l in 0..=(k - i - j) {
                        nodes.push([i as f64 / kf, j as f64 / kf, l as f64 / kf]);
                    }
                }
            }
        }
        Shape::Tri => {
            for i in 0..=k {
                for j in 0..=(k - i) {
                    nodes.push([i as f64 / kf, j as f64 / kf, 0.0]);
                }
            }
        }
    }
    nodes
}

/// Build a scalar polynomial basis of degree `k` on `shape`.
///
/// Degrees up to [`MAX_BASIS_DEGREE`] are supported (the finite-element
/// degree itself is capped at 4; degree 5 serves the degree-(k+1) spaces).
pub fn make_scalar_basis(shape: Shape, k: usize, family: BasisFamily) -> Result<ScalarBasis> {
    if k > MAX_BASIS_DEGREE {
        return Err(Error::Config(format!(
            "polynomial degree {k} exceeds the supported maximum {MAX_BASIS_DEGREE}"
        )));
    }
    let monos = monomial_exponents(shape, k);
    let dim = monos.len();

    // Orthonormalize the monomials by modified Gram–Schmidt against the
    // exact reference inner product (quadrature exact to degree 2k), with a
    // second pass to restore orthogonality to machine precision.
    let quad = make_quadrature(shape, (2 * k).min(MAX_DEGREE))?;
    debug_assert!(2 * k <= MAX_DEGREE);
    let vmono = eval_monomials(&monos, k, &quad.points);
    let w = &quad.weights;

    let mut coeff = DMatrix::<f64>::identity(dim, dim);
    let mut vals = vmono.clone(); // quadrature values of the current columns
    let dot = |a: &DMatrix<f64>, ia: usize, b: &DMatrix<f64>, ib: usize| -> f64 {
        (0..w.len()).map(|q| w[q] * a[(q, ia)] * b[(q, ib)]).sum()
    };
    for _pass in 0..2 {
        for j in 0..dim {
            for i in 0..j {
                let proj = dot(&vals, i, &vals, j);
                for q in 0..w.len() {
                    let vi = vals[(q, i)];
                    vals[(q, j)] -= proj * vi;
                }
                for m in 0..dim {
                    let ci = coeff[(m, i)];
                    coeff[(m, j)] -= proj * ci;
                }
            }
            let norm = dot(&vals, j, &vals, j).sqrt();
            assert!(norm > 1e-13, "monomials degenerate at degree {k}");
            for q in 0..w.len() {
                vals[(q, j)] /= norm;
            }
            for m in 0..dim {
                coeff[(m, j)] /= norm;
            }
        }
    }

    match family {
        BasisFamily::Orthonormal => Ok(ScalarBasis {
            shape,
            degree: k,
            family,
            monos,
            coeff,
            nodes: None,
        }),
        BasisFamily::Nodal => {
            // Nodal basis through the orthonormal one: solve V·N = I where
            // V[(q, j)] = ortho_j(node_q); then coeff_nodal = coeff_ortho·N.
            let nodes = lattice_nodes(shape, k);
            let vort = eval_monomials(&monos, k, &nodes) * &coeff;
            let lu = vort.lu();
            let n = lu
                .solve(&DMatrix::identity(dim, dim))
                .expect("lattice Vandermonde is nonsingular for supported degrees");
            Ok(ScalarBasis {
                shape,
                degree: k,
                family,
                monos,
                coeff: coeff * n,
                nodes: Some(nodes),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem_core::quad::{tet_monomial_integral, tri_monomial_integral};

    #[test]
    fn dimensions_match_binomial_counts() {
        for (k, tet, tri) in [(0, 1, 1), (1, 4, 3), (2, 10, 6), (3, 20, 10), (4, 35, 15), (5, 56, 21)]
        {
            assert_eq!(space_dim(Shape::Tet, k), tet);
            assert_eq!(space_dim(Shape::Tri, k), tri);
            let b = make_scalar_basis(Shape::Tet, k, BasisFamily::Orthonormal).unwrap();
            assert_eq!(b.dim(), tet);
        }
        assert!(make_scalar_basis(Shape::Tet, MAX_BASIS_DEGREE + 1, BasisFamily::Nodal).is_err());
    }

    #[test]
    fn nodal_k1_is_identity_at_vertices() {
        let b = make_scalar_basis(Shape::Tet, 1, BasisFamily::Nodal).unwrap();
        let nodes = b.nodes().unwrap().to_vec();
        assert_eq!(nodes.len(), 4);
        let v = b.eval(&nodes);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v[(i, j)] - expect).abs() < 1e-12, "({i},{j}) = {}", v[(i, j)]);
            }
        }
    }

    #[test]
    fn nodal_partition_of_unity() {
        // Σ_i φ_i ≡ 1 for Lagrange bases: check at scattered points.
        let pts = [[0.1, 0.2, 0.3], [0.05, 0.9, 0.02], [0.3, 0.3, 0.3], [0.0, 0.0, 1.0]];
        for k in 1..=MAX_BASIS_DEGREE {
            let b = make_scalar_basis(Shape::Tet, k, BasisFamily::Nodal).unwrap();
            let v = b.eval(&pts);
            for ip in 0..pts.len() {
                let s: f64 = (0..b.dim()).map(|j| v[(ip, j)]).sum();
                assert!((s - 1.0).abs() < 1e-12, "k={k} point {ip}: Σφ = {s}");
            }
        }
    }

    #[test]
    fn orthonormal_gram_is_identity() {
        for shape in [Shape::Tet, Shape::Tri] {
            for k in 0..=MAX_BASIS_DEGREE {
                let b = make_scalar_basis(shape, k, BasisFamily::Orthonormal).unwrap();
                let quad = make_quadrature(shape, 2 * k).unwrap();
                let v = b.eval(&quad.points);
                for i in 0..b.dim() {
                    for j in 0..b.dim() {
                        let g: f64 = (0..quad.len())
                            .map(|q| quad.weights[q] * v[(q, i)] * v[(q, j)])
                            .sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (g - expect).abs() < 1e-12,
                            "{shape:?} k={k} Gram[{i},{j}] = {g}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormal_k1_gram_under_degree2_rule_from_rational_oracle() {
        // Independent route: assemble the Gram of the k=1 orthonormal basis
        // from exact monomial integrals (no quadrature), expecting I₄.
        let b = make_scalar_basis(Shape::Tet, 1, BasisFamily::Orthonormal).unwrap();
        let monos = monomial_exponents(Shape::Tet, 1);
        for i in 0..4 {
            for j in 0..4 {
                let mut g = 0.0;
                for (mi, em) in monos.iter().enumerate() {
                    for (mj, en) in monos.iter().enumerate() {
                        g += b.coeff[(mi, i)]
                            * b.coeff[(mj, j)]
                            * tet_monomial_integral(em[0] + en[0], em[1] + en[1], em[2] + en[2]);
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12, "Gram[{i},{j}] = {g}");
            }
        }
        // Same check on the triangle.
        let bt = make_scalar_basis(Shape::Tri, 2, BasisFamily::Orthonormal).unwrap();
        let monos = monomial_exponents(Shape::Tri, 2);
        for i in 0..bt.dim() {
            for j in 0..bt.dim() {
                let mut g = 0.0;
                for (mi, em) in monos.iter().enumerate() {
                    for (mj, en) in monos.iter().enumerate() {
                        g += bt.coeff[(mi, i)]
                            * bt.coeff[(mj, j)]
                            * tri_monomial_integral(em[0] + en[0], em[1] + en[1]);
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12, "tri Gram[{i},{j}] = {g}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let pts = [[0.21, 0.13, 0.4], [0.05, 0.55, 0.1]];
        let h = 1e-6;
        for k in 1..=4 {
            let b = make_scalar_basis(Shape::Tet, k, BasisFamily::Orthonormal).unwrap();
            let grads = b.eval_grad(&pts);
            for (ip, p) in pts.iter().enumerate() {
                for d in 0..3 {
                    let mut pp = *p;
                    let mut pm = *p;
                    pp[d] += h;
                    pm[d] -= h;
                    let vp = b.eval(&[pp]);
                    let vm = b.eval(&[pm]);
                    for j in 0..b.dim() {
                        let fd = (vp[(0, j)] - vm[(0, j)]) / (2.0 * h);
                        assert!(
                            (grads[d][(ip, j)] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                            "k={k} d={d} j={j}: {} vs {}",
                            grads[d][(ip, j)],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn modal_first_function_is_constant() {
        // The first orthonormal function is 1/√measure — positive constant.
        let b = make_scalar_basis(Shape::Tet, 3, BasisFamily::Orthonormal).unwrap();
        let v = b.eval(&[[0.1, 0.1, 0.1], [0.4, 0.3, 0.2]]);
        let expect = (6.0f64).sqrt(); // 1/√(1/6)
        assert!((v[(0, 0)] - expect).abs() < 1e-12);
        assert!((v[(1, 0)] - expect).abs() < 1e-12);
    }
}
