//! MatrixMarket coordinate-format output for debugging dumps.

use crate::linalg::csr::CsrMatrix;

/// Render a sparse matrix in MatrixMarket coordinate format (1-based
/// indices, 17 significant digits, `general` symmetry).
pub fn write_matrix_market(a: &CsrMatrix) -> String {
    let mut out = String::with_capacity(64 + 48 * a.nnz());
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", a.nrows, a.ncols, a.nnz()));
    for i in 0..a.nrows {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            out.push_str(&format!("{} {} {:.16e}\n", i + 1, a.col_idx[p] + 1, a.vals[p]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::{to_csr, TripletBuffer};

    #[test]
    fn golden_format() {
        let mut b = TripletBuffer::new();
        b.push(0, 0, 1.5);
        b.push(1, 0, -2.0);
        let a = to_csr(&b, 2, 2).unwrap();
        let s = write_matrix_market(&a);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "2 2 2");
        assert_eq!(lines[2], "1 1 1.5000000000000000e0");
        assert_eq!(lines[3], "2 1 -2.0000000000000000e0");
    }
}
