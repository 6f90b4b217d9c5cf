//! Compressed sparse row matrices with deterministic construction.
//!
//! Assembly produces triplet streams in element order; `from_triplets` sums
//! duplicates with a stable sort so the floating-point accumulation order is
//! reproducible across runs and thread counts. Matrix-vector products
//! parallelize over rows (each row is an independent sequential dot), which
//! keeps results bitwise deterministic.

use crate::error::{Error, Result};
use crate::par;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets, summing duplicates. The sort is
    /// stable, so duplicate entries accumulate in their original order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Dense constructor for small test and reference matrices; zeros are
    /// dropped.
    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n_rows = a.len();
        let n_cols = a.first().map_or(0, |r| r.len());
        let mut triplets = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.vals[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// y = A x, parallel over rows.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        let row_ptr = &self.row_ptr;
        let col_idx = &self.col_idx;
        let vals = &self.vals;
        par::fill_indexed(y, |i| {
            let mut acc = 0.0;
            for k in row_ptr[i]..row_ptr[i + 1] {
                acc += vals[k] * x[col_idx[k]];
            }
            acc
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// r = b - A x.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = self.matvec(x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }

    /// Entrywise sum; rows are merged by column index, so adding two exactly
    /// symmetric matrices stays exactly symmetric.
    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n_rows {
            let (mut i, mut j) = (self.row_ptr[r], other.row_ptr[r]);
            let (iend, jend) = (self.row_ptr[r + 1], other.row_ptr[r + 1]);
            while i < iend || j < jend {
                let ci = if i < iend { self.col_idx[i] } else { usize::MAX };
                let cj = if j < jend { other.col_idx[j] } else { usize::MAX };
                if ci < cj {
                    col_idx.push(ci);
                    vals.push(self.vals[i]);
                    i += 1;
                } else if cj < ci {
                    col_idx.push(cj);
                    vals.push(other.vals[j]);
                    j += 1;
                } else {
                    col_idx.push(ci);
                    vals.push(self.vals[i] + other.vals[j]);
                    i += 1;
                    j += 1;
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut next = row_ptr.clone();
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let slot = next[c];
                next[c] += 1;
                col_idx[slot] = r;
                vals[slot] = self.vals[k];
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Sparse product A * B via row-wise accumulation. Per output row, values
    /// accumulate in the deterministic order given by traversing A's row and
    /// B's rows; columns are emitted sorted.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_cols, other.n_rows, "matmul shape mismatch");
        let n_cols = other.n_cols;
        let rows: Vec<(Vec<usize>, Vec<f64>)> = par::map_indexed(self.n_rows, |i| {
            let mut acc = vec![0.0; n_cols];
            let mut touched = Vec::new();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[k];
                let mid = self.col_idx[k];
                for l in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[l];
                    if acc[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    acc[c] += a * other.vals[l];
                }
            }
            touched.sort_unstable();
            let vals = touched.iter().map(|&c| acc[c]).collect();
            (touched, vals)
        });
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        for (i, (cols, _)) in rows.iter().enumerate() {
            row_ptr[i + 1] = row_ptr[i] + cols.len();
        }
        let mut col_idx = Vec::with_capacity(row_ptr[self.n_rows]);
        let mut vals = Vec::with_capacity(row_ptr[self.n_rows]);
        for (cols, vs) in rows {
            col_idx.extend(cols);
            vals.extend(vs);
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Principal submatrix on the given index set, in the order given.
    /// Indices must be unique.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SparseMatrix {
        assert_eq!(self.n_rows, self.n_cols);
        let mut pos = vec![usize::MAX; self.n_cols];
        for (new, &old) in idx.iter().enumerate() {
            debug_assert!(pos[old] == usize::MAX, "duplicate index {old}");
            pos[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &old_r) in idx.iter().enumerate() {
            for k in self.row_ptr[old_r]..self.row_ptr[old_r + 1] {
                let new_c = pos[self.col_idx[k]];
                if new_c != usize::MAX {
                    triplets.push((new_r, new_c, self.vals[k]));
                }
            }
        }
        SparseMatrix::from_triplets(idx.len(), idx.len(), triplets)
    }

    /// Largest absolute asymmetry max |A_ij - A_ji|; 0.0 for exactly
    /// symmetric assembly.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let t = self.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            // Merge the two sorted rows.
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let next_a = ca.get(p).copied().unwrap_or(usize::MAX);
                let next_b = cb.get(q).copied().unwrap_or(usize::MAX);
                if next_a == next_b {
                    worst = worst.max((va[p] - vb[q]).abs());
                    p += 1;
                    q += 1;
                } else if next_a < next_b {
                    worst = worst.max(va[p].abs());
                    p += 1;
                } else {
                    worst = worst.max(vb[q].abs());
                    q += 1;
                }
            }
        }
        worst
    }

    /// Drop entries that are exactly zero (used when comparing sparsity
    /// patterns of matrices built along different algebraic routes).
    pub fn drop_zeros(&self) -> SparseMatrix {
        let mut triplets = Vec::new();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0.0 {
                    triplets.push((i, c, v));
                }
            }
        }
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, triplets)
    }

    /// Per-row envelope: index of the first structural nonzero at or below
    /// the diagonal (rows without such an entry fall back to the diagonal).
    pub fn lower_envelope(&self) -> Vec<usize> {
        assert_eq!(self.n_rows, self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                let (cols, _) = self.row(i);
                cols.iter().copied().find(|&c| c <= i).unwrap_or(i).min(i)
            })
            .collect()
    }

    pub fn scale_rows_cols(&self, d: &[f64]) -> SparseMatrix {
        assert_eq!(self.n_rows, self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.vals[k] *= d[i] * d[out.col_idx[k]];
            }
        }
        out
    }

    /// Matrix-Market coordinate export for offline inspection.
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.17e}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }

    pub fn require_square(&self) -> Result<()> {
        if self.n_rows != self.n_cols {
            return Err(Error::SizeMismatch(format!(
                "{}x{} matrix where a square one is required",
                self.n_rows, self.n_cols
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        SparseMatrix::from_dense(&[
            vec![4.0, -1.0, 0.0],
            vec![-1.0, 4.0, -1.0],
            vec![0.0, -1.0, 4.0],
        ])
    }

    #[test]
    fn triplets_sum_duplicates_in_order() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (0, 1, -1.0)],
        );
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 1), 2.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = small();
        let x = vec![1.0, 2.0, 3.0];
        assert_eq!(a.matvec(&x), vec![2.0, 4.0, 10.0]);
        assert_eq!(SparseMatrix::identity(3).matvec(&x), x);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let t = a.transpose();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(t.get(2, 1), 4.0);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 2.0);
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(1, 0), 4.0);
        assert_eq!(c.get(1, 1), 3.0);
    }

    #[test]
    fn principal_submatrix_keeps_order() {
        let a = small();
        let s = a.principal_submatrix(&[2, 0]);
        assert_eq!(s.get(0, 0), 4.0);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 1), 4.0);
    }

    #[test]
    fn asymmetry_detects_and_clears() {
        assert_eq!(small().max_asymmetry(), 0.0);
        let b = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.5, 1.0]]);
        assert!((b.max_asymmetry() - 0.5).abs() < 1e-15);
        let c = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert_eq!(c.max_asymmetry(), 2.0);
    }

    #[test]
    fn matrix_market_roundtrip() {
        let a = small();
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        let header: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(header, vec![3, 3, a.nnz()]);
        let mut triplets = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let r: usize = it.next().unwrap().parse().unwrap();
            let c: usize = it.next().unwrap().parse().unwrap();
            let v: f64 = it.next().unwrap().parse().unwrap();
            triplets.push((r - 1, c - 1, v));
        }
        let back = SparseMatrix::from_triplets(3, 3, triplets);
        assert_eq!(back, a);
    }

    #[test]
    fn add_merges_disjoint_and_overlapping_entries() {
        let a = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (2, 1, 3.0)]);
        let b = SparseMatrix::from_triplets(3, 3, vec![(0, 2, 5.0), (1, 1, 7.0)]);
        let s = a.add(&b);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 2), 7.0);
        assert_eq!(s.get(1, 1), 7.0);
        assert_eq!(s.get(2, 1), 3.0);
        assert_eq!(s.nnz(), 4);
        // Adding the zero matrix is the identity.
        let z = SparseMatrix::from_triplets(3, 3, vec![]);
        assert_eq!(a.add(&z), a);
    }
}
