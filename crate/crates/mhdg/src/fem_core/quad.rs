//! Quadrature rules on the reference tetrahedron and reference triangle.
//!
//! Rules are built by collapsing tensor-product Gauss–Legendre grids onto
//! the simplex (the Duffy transformation), with the polynomial Jacobian of
//! the collapse absorbed into the weights. For a requested exactness
//! degree `d` the per-direction Gauss orders are chosen so that the
//! collapsed integrand — monomial times Jacobian — is integrated exactly,
//! so every rule is exact for all polynomials of total degree ≤ `d` on the
//! simplex (the unit-test suite checks this against closed-form rational
//! monomial integrals). All weights are positive and sum to the reference
//! measure (1/6 for the tetrahedron, 1/2 for the triangle).

use crate::error::{Error, Result};

/// Largest exactness degree the constructor accepts. Degree 3k+2 at the
/// degree cap k = 4 needs 14; error norms use a slightly richer rule.
pub const MAX_DEGREE: usize = 16;

/// Reference shapes quadrature and bases are defined on.
///
/// * tetrahedron: `{ξ ≥ 0, ξ₀+ξ₁+ξ₂ ≤ 1}` (measure 1/6),
/// * triangle: `{ξ ≥ 0, ξ₀+ξ₁ ≤ 1}` (measure 1/2, third coordinate unused).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Tet,
    Tri,
}

impl Shape {
    /// Reference measure (volume resp. area).
    pub fn measure(self) -> f64 {
        match self {
            Shape::Tet => 1.0 / 6.0,
            Shape::Tri => 0.5,
        }
    }
}

/// A quadrature rule on a reference simplex.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Shape the rule lives on.
    pub shape: Shape,
    /// Reference coordinates; for triangles the third entry is 0.
    pub points: Vec<[f64; 3]>,
    /// Weights in the reference measure (sum = `shape.measure()`).
    pub weights: Vec<f64>,
    /// Guaranteed polynomial exactness degree.
    pub degree: usize,
}

impl QuadratureRule {
    /// Number of quadrature points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// `true` if the rule has no points (never happens for valid rules).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [0, 1], exact to degree `2m−1`.
///
/// Nodes are the roots of the Legendre polynomial `P_m`, found by Newton
/// iteration from the Chebyshev initial guess; weights from the standard
/// closed form `w = 2 / ((1−x²) P_m′(x)²)` on [−1, 1], then mapped.
pub fn gauss_legendre_01(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss rule needs at least one point");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Root of P_m on (−1, 1), i-th largest.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // One polishing step for full double accuracy.
        let (p, dp) = legendre_and_derivative(m, x);
        x -= p / dp;
        let (_, dp) = legendre_and_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x); // descending roots → ascending nodes on [0,1]
        weights[i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_m` at `x` via the
/// three-term recurrence.
fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0; // P_0
    let mut p1 = x; // P_1
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // (1−x²) P_m′(x) = m (P_{m−1}(x) − x P_m(x))
    let dp = (m as f64) * (p0 - x * p1) / (1.0 - x * x);
    (p1, dp)
}

/// Build a quadrature rule of exactness `d` on the given reference shape.
///
/// Degrees 0 and 1 return the one-point centroid rule; higher degrees use
/// the collapsed tensor construction. Errors for `d > MAX_DEGREE`.
pub fn make_quadrature(shape: Shape, d: usize) -> Result<QuadratureRule> {
    if d > MAX_DEGREE {
        return Err(Error::Config(format!(
            "quadrature degree {d} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if d <= 1 {
        // Centroid rule: exact for affine integrands.
        let (point, weight) = match shape {
            Shape::Tet => ([0.25, 0.25, 0.25], 1.0 / 6.0),
            Shape::Tri => ([1.0 / 3.0, 1.0 / 3.0, 0.0], 0.5),
        };
        return Ok(QuadratureRule { shape, points: vec![point], weights: vec![weight], degree: d });
    }
    let rule = match shape {
        Shape::Tet => {
            // x = a, y = b(1−a), z = c(1−a)(1−b); dV = (1−a)²(1−b) da db dc.
            // Monomial x^α y^β z^γ of total degree ≤ d becomes a polynomial of
            // degree ≤ d+2 in a, ≤ d+1 in b, ≤ d in c.
            let ma = (d + 3).div_ceil(2);
            let mb = (d + 2).div_ceil(2);
            let mc = (d + 1).div_ceil(2);
            let (na, wa) = gauss_legendre_01(ma);
            let (nb, wb) = gauss_legendre_01(mb);
            let (nc, wc) = gauss_legendre_01(mc);
            let mut points = Vec::with_capacity(ma * mb * mc);
            let mut weights = Vec::with_capacity(ma * mb * mc);
            for (ia, &a) in na.iter().enumerate() {
                for (ib, &b) in nb.iter().enumerate() {
                    for (ic, &c) in nc.iter().enumerate() {
                        let x = a;
                        let y = b * (1.0 - a);
                        let z = c * (1.0 - a) * (1.0 - b);
                        let jac = (1.0 - a) * (1.0 - a) * (1.0 - b);
                        points.push([x, y, z]);
                        weights.push(wa[ia] * wb[ib] * wc[ic] * jac);
                    }
                }
            }
            QuadratureRule { shape, points, weights, degree: d }
        }
        Shape::Tri => {
            // x = a, y = b(1−a); dA = (1−a) da db.
            let ma = (d + 2).div_ceil(2);
            let mb = (d + 1).div_ceil(2);
            let (na, wa) = gauss_legendre_01(ma);
            let (nb, wb) = gauss_legendre_01(mb);
            let mut points = Vec::with_capacity(ma * mb);
            let mut weights = Vec::with_capacity(ma * mb);
            for (ia, &a) in na.iter().enumerate() {
                for (ib, &b) in nb.iter().enumerate() {
                    points.push([a, b * (1.0 - a), 0.0]);
                    weights.push(wa[ia] * wb[ib] * (1.0 - a));
                }
            }
            QuadratureRule { shape, points, weights, degree: d }
        }
    };
    Ok(rule)
}

/// Exact integral of the monomial `x^a y^b z^c` over the reference
/// tetrahedron: `a! b! c! / (a+b+c+3)!`, evaluated in exact integer
/// arithmetic. Serves as the independent oracle for quadrature tests.
pub fn tet_monomial_integral(a: u32, b: u32, c: u32) -> f64 {
    factorial_ratio(&[a, b, c], a + b + c + 3)
}

/// Exact integral of `x^a y^b` over the reference triangle:
/// `a! b! / (a+b+2)!`.
pub fn tri_monomial_integral(a: u32, b: u32) -> f64 {
    factorial_ratio(&[a, b], a + b + 2)
}

/// `(Π nᵢ!) / d!` for small arguments, exactly in u128 then converted.
fn factorial_ratio(nums: &[u32], denom: u32) -> f64 {
    let fact = |n: u32| -> u128 { (1..=n as u128).product::<u128>().max(1) };
    let num: u128 = nums.iter().map(|&n| fact(n)).product();
    num as f64 / fact(denom) as f64
}
