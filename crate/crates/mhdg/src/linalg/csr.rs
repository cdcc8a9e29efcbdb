//! Triplet assembly buffers and compressed sparse row matrices.

use crate::error::{Error, Result};

/// An append-only buffer of (row, col, value) contributions. Duplicate
/// coordinates are summed when converting to CSR.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    /// Empty buffer.
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty buffer with reserved capacity.
    pub fn with_capacity(cap: usize) -> Self {
        TripletBuffer { entries: Vec::with_capacity(cap) }
    }

    /// Append one contribution.
    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    /// Append every contribution of `other`.
    pub fn extend_from(&mut self, other: &TripletBuffer) {
        self.entries.extend_from_slice(&other.entries);
    }

    /// Append every contribution of `other`, transposed (rows and columns
    /// swapped) and scaled: entries become `(col, row, scale·value)`. Used
    /// to install an exact transpose of an assembled coupling block.
    pub fn extend_transposed_scaled(&mut self, other: &TripletBuffer, scale: f64) {
        self.entries.extend(other.entries.iter().map(|&(r, c, v)| (c, r, scale * v)));
    }

    /// Append every contribution of `other` shifted by a block offset.
    pub fn extend_shifted(&mut self, other: &TripletBuffer, row_offset: usize, col_offset: usize) {
        self.entries
            .extend(other.entries.iter().map(|&(r, c, v)| (r + row_offset, c + col_offset, v)));
    }

    /// Number of raw contributions (before duplicate summation).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `true` when no contributions have been pushed.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Raw contributions.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

/// Compressed sparse row matrix. Column indices are sorted and unique
/// within each row; explicit zeros are permitted.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    /// Number of rows.
    pub nrows: usize,
    /// Number of columns.
    pub ncols: usize,
    /// Row offsets, length `nrows + 1`.
    pub row_ptr: Vec<usize>,
    /// Column indices, sorted within each row.
    pub col_idx: Vec<usize>,
    /// Values aligned with `col_idx`.
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// `y = A·x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
        y
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.vals[lo + p],
            Err(_) => 0.0,
        }
    }

    /// Max-norm of the stored values.
    pub fn norm_max(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Transposed copy (CSR of Aᵀ), deterministic. Rows of the result are
    /// filled in ascending source-row order, so columns stay sorted.
    pub fn transpose(&self) -> CsrMatrix {
        let nnz = self.nnz();
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for j in 0..self.ncols {
            row_ptr[j + 1] += row_ptr[j];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[p];
                let dst = next[c];
                col_idx[dst] = i;
                vals[dst] = self.vals[p];
                next[c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, vals }
    }

    /// Dense copy, for tests and small oracles.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[p])] = self.vals[p];
            }
        }
        m
    }
}

/// Convert a triplet buffer into CSR with `nrows × ncols` shape.
///
/// Duplicates are summed. The output — bitwise — does not depend on the
/// order contributions were pushed: entries are sorted by (row, col, value
/// bit pattern) before summation, so any permutation of the same multiset
/// of contributions produces identical results.
pub fn to_csr(buffer: &TripletBuffer, nrows: usize, ncols: usize) -> Result<CsrMatrix> {
    for &(r, c, _) in buffer.entries() {
        if r >= nrows || c >= ncols {
            return Err(Error::Linalg(format!(
                "triplet ({r}, {c}) out of range for a {nrows}×{ncols} matrix"
            )));
        }
    }
    let mut entries = buffer.entries().to_vec();
    entries.sort_unstable_by(|a, b| {
        a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2))
    });

    let mut row_ptr = vec![0usize; nrows + 1];
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let (r, c, _) = entries[i];
        let mut acc = 0.0;
        while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
            acc += entries[i].2;
            i += 1;
        }
        row_ptr[r + 1] += 1;
        col_idx.push(c);
        vals.push(acc);
    }
    for r in 0..nrows {
        row_ptr[r + 1] += row_ptr[r];
    }
    Ok(CsrMatrix { nrows, ncols, row_ptr, col_idx, vals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuffer::new();
        b.push(0, 0, 1.0);
        b.push(0, 0, 2.0);
        let a = to_csr(&b, 2, 2).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn empty_buffer_gives_zero_matrix() {
        let a = to_csr(&TripletBuffer::new(), 3, 4).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.matvec(&[1.0; 4]), vec![0.0; 3]);
    }

    #[test]
    fn out_of_range_rejected() {
        let mut b = TripletBuffer::new();
        b.push(2, 0, 1.0);
        assert!(to_csr(&b, 2, 2).is_err());
    }

    #[test]
    fn random_triplets_match_dense_accumulation_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut b = TripletBuffer::new();
        let n = 50;
        for _ in 0..2000 {
            b.push(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
        }
        let a = to_csr(&b, n, n).unwrap();
        // Oracle: dense accumulation in the same deterministic order.
        let mut entries = b.entries().to_vec();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (r, c, v) in entries {
            dense[(r, c)] += v;
        }
        let got = a.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(got[(i, j)], dense[(i, j)], "exact match required at ({i},{j})");
            }
        }
        // Columns sorted and unique per row.
        for i in 0..n {
            let lo = a.row_ptr[i];
            let hi = a.row_ptr[i + 1];
            for p in lo + 1..hi {
                assert!(a.col_idx[p - 1] < a.col_idx[p]);
            }
        }
    }

    #[test]
    fn csr_is_independent_of_contribution_order() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut trips = Vec::new();
        for _ in 0..500 {
            trips.push((rng.gen_range(0..20), rng.gen_range(0..20), rng.gen_range(-1.0..1.0)));
        }
        let mut b1 = TripletBuffer::new();
        for &(r, c, v) in &trips {
            b1.push(r, c, v);
        }
        // Reversed arrival order.
        let mut b2 = TripletBuffer::new();
        for &(r, c, v) in trips.iter().rev() {
            b2.push(r, c, v);
        }
        let a1 = to_csr(&b1, 20, 20).unwrap();
        let a2 = to_csr(&b2, 20, 20).unwrap();
        assert_eq!(a1.col_idx, a2.col_idx);
        // Bitwise identical values despite different push order.
        let bits1: Vec<u64> = a1.vals.iter().map(|v| v.to_bits()).collect();
        let bits2: Vec<u64> = a2.vals.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits1, bits2);
    }

    #[test]
    fn transpose_round_trip() {
        let mut b = TripletBuffer::new();
        b.push(0, 2, 5.0);
        b.push(1, 0, -1.0);
        b.push(2, 1, 2.0);
        b.push(0, 0, 1.0);
        let a = to_csr(&b, 3, 3).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(2, 0), 5.0);
        assert_eq!(t.get(0, 1), -1.0);
        let tt = t.transpose();
        assert_eq!(tt.to_dense(), a.to_dense());
    }
}
