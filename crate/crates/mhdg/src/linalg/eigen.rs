//! Smallest-eigenvalue estimation by inverse power iteration.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::lu::factorize;

/// Estimate the smallest eigenvalue of a symmetric matrix by inverse power
/// iteration (one LU factorization, repeated solves).
///
/// For symmetric positive-definite input this is the smallest eigenvalue;
/// for indefinite input the iteration converges to the eigenvalue nearest
/// zero and its sign is reported as computed (a negative result signals
/// indefiniteness, not an error). Convergence: the eigenpair residual
/// `‖Ax − λx‖ ≤ tol·|λ|·‖x‖`, which for symmetric matrices bounds the
/// eigenvalue error by `tol·|λ|`.
pub fn smallest_eigenvalue_spd(a: &CsrMatrix, tol: f64) -> Result<f64> {
    if a.nrows != a.ncols {
        return Err(Error::Linalg("eigenvalue estimation needs a square matrix".into()));
    }
    let n = a.nrows;
    if n == 0 {
        return Err(Error::Linalg("empty matrix".into()));
    }
    let f = factorize(a)?;
    // Deterministic start vector with no special structure.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) + 0.3).sin()).collect();
    normalize(&mut x);
    let mut lambda = 0.0;
    const MAX_ITERS: usize = 10_000;
    for _ in 0..MAX_ITERS {
        let mut y = f.solve(&x);
        normalize(&mut y);
        let ay = a.matvec(&y);
        let num: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        lambda = num; // Rayleigh quotient with ‖y‖ = 1
        let res: f64 =
            ay.iter().zip(&y).map(|(a, b)| (a - lambda * b) * (a - lambda * b)).sum::<f64>().sqrt();
        x = y;
        if res <= tol * lambda.abs() {
            return Ok(lambda);
        }
    }
    Err(Error::NoConvergence(format!(
        "inverse power iteration: residual above {:.1e}·|λ| after {MAX_ITERS} iterations (λ ≈ {lambda:.6e})",
        tol
    )))
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(n > 0.0, "zero vector in power iteration");
    for v in x {
        *v /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::{to_csr, TripletBuffer};

    fn diag(vals: &[f64]) -> CsrMatrix {
        let mut b = TripletBuffer::new();
        for (i, &v) in vals.iter().enumerate() {
            b.push(i, i, v);
        }
        to_csr(&b, vals.len(), vals.len()).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let a = diag(&[3.0, 1.0, 2.0]);
        let l = smallest_eigenvalue_spd(&a, 1e-10).unwrap();
        assert!((l - 1.0).abs() < 1e-9, "{l}");
    }

    #[test]
    fn tridiagonal_laplacian_closed_form() {
        // tridiag(−1, 2, −1) of size m has λ_min = 2 − 2cos(π/(m+1)).
        for m in [5usize, 20, 57] {
            let mut b = TripletBuffer::new();
            for i in 0..m {
                b.push(i, i, 2.0);
                if i + 1 < m {
                    b.push(i, i + 1, -1.0);
                    b.push(i + 1, i, -1.0);
                }
            }
            let a = to_csr(&b, m, m).unwrap();
            let l = smallest_eigenvalue_spd(&a, 1e-10).unwrap();
            let exact = 2.0 - 2.0 * (std::f64::consts::PI / (m as f64 + 1.0)).cos();
            assert!((l - exact).abs() <= 1e-8 * exact, "m={m}: {l} vs {exact}");
        }
    }

    #[test]
    fn indefinite_reports_negative() {
        let a = diag(&[-1.0, 2.0, 5.0]);
        let l = smallest_eigenvalue_spd(&a, 1e-10).unwrap();
        assert!((l + 1.0).abs() < 1e-9, "{l}");
    }
}
