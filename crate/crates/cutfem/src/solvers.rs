//! Sparse solver kernels: Gauss-Seidel sweeps, Jacobi-preconditioned CG,
//! an envelope Cholesky factorization with BFS ordering, and a Lanczos-based
//! condition number estimate.

use crate::error::{Error, Result};
use crate::par;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Forward,
    Backward,
}

/// One Gauss-Seidel sweep over all unknowns in index order (or reverse).
/// Deliberately sequential: the update order is part of the smoother
/// contract and must not depend on thread count.
pub fn gauss_seidel_sweep(
    a: &SparseMatrix,
    x: &mut [f64],
    b: &[f64],
    dir: SweepDirection,
) -> Result<()> {
    debug_assert_eq!(a.n_rows(), a.n_cols());
    debug_assert_eq!(x.len(), b.len());
    let n = a.n_rows();
    let range: Box<dyn Iterator<Item = usize>> = match dir {
        SweepDirection::Forward => Box::new(0..n),
        SweepDirection::Backward => Box::new((0..n).rev()),
    };
    for i in range {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut sigma = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag = v;
            } else {
                sigma += v * x[c];
            }
        }
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal(i));
        }
        x[i] = (b[i] - sigma) / diag;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final relative residual |b - Ax| / |b|.
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero start, stopping on
/// |b - Ax| <= rel_tol * |b|.
pub fn pcg_jacobi(
    a: &SparseMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome> {
    a.require_square()?;
    let n = a.n_rows();
    debug_assert_eq!(b.len(), n);
    let norm_b = par::norm(b);
    if norm_b == 0.0 {
        return Ok(PcgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            rel_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = {
        let d = a.diag();
        if let Some(i) = d.iter().position(|&v| v <= 0.0) {
            return Err(Error::NotSpd(format!(
                "nonpositive diagonal {:.3e} at row {i}",
                d[i]
            )));
        }
        d.iter().map(|&v| 1.0 / v).collect()
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = par::dot(&r, &z);
    let mut ap = vec![0.0; n];
    for iter in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = par::dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotSpd(format!(
                "nonpositive curvature {pap:.3e} at iteration {iter}"
            )));
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rel = par::norm(&r) / norm_b;
        if rel <= rel_tol {
            return Ok(PcgOutcome {
                x,
                iterations: iter,
                converged: true,
                rel_residual: rel,
            });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = par::dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let rel = par::norm(&r) / norm_b;
    Ok(PcgOutcome {
        x,
        iterations: max_iter,
        converged: false,
        rel_residual: rel,
    })
}

/// Node graph driving the factorization ordering. Each node owns a block of
/// unknowns that stay adjacent in the permutation (for interface matrices: a
/// doubled vertex with its standard and extended DOF).
#[derive(Debug, Clone)]
pub struct OrderingGraph {
    pub blocks: Vec<Vec<usize>>,
    pub adj: Vec<Vec<usize>>,
}

impl OrderingGraph {
    /// One singleton node per row, adjacency from the matrix pattern.
    pub fn singletons_from_pattern(a: &SparseMatrix) -> Self {
        let n = a.n_rows();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            let (cols, _) = a.row(i);
            for &c in cols {
                if c != i {
                    adj[i].push(c);
                }
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        OrderingGraph {
            blocks: (0..n).map(|i| vec![i]).collect(),
            adj,
        }
    }

    /// BFS node order starting from node 0, neighbors visited in ascending
    /// index order; disconnected components restart at the smallest unseen
    /// node.
    pub fn bfs_order(&self) -> Vec<usize> {
        let n = self.blocks.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        let mut sorted_adj: Vec<Vec<usize>> = self.adj.clone();
        for l in &mut sorted_adj {
            l.sort_unstable();
        }
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &v in &sorted_adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        order
    }
}

/// Envelope (skyline) Cholesky factor of a permuted SPD matrix. Stores, per
/// row, the dense segment from the first structural nonzero to the diagonal;
/// fill can only appear inside that envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// Permutation: new index -> original index.
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    row_start: Vec<usize>,
    vals: Vec<f64>,
}

/// Factor `a` with rows reordered by a BFS traversal of `graph`. Blocks of a
/// node remain adjacent in the permutation, giving small 2x2-blocked bands
/// for interface matrices ordered along the interface.
pub fn sparse_cholesky_bfs(a: &SparseMatrix, graph: &OrderingGraph) -> Result<EnvelopeCholesky> {
    a.require_square()?;
    let n = a.n_rows();
    let mut perm = Vec::with_capacity(n);
    for node in graph.bfs_order() {
        perm.extend_from_slice(&graph.blocks[node]);
    }
    debug_assert_eq!(perm.len(), n, "graph blocks must partition the index set");
    let mut iperm = vec![usize::MAX; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }

    // Envelope of the permuted matrix.
    let mut first = vec![0usize; n];
    for i in 0..n {
        let (cols, _) = a.row(perm[i]);
        let mut lo = i;
        for &c in cols {
            let nc = iperm[c];
            if nc < lo {
                lo = nc;
            }
        }
        first[i] = lo;
    }
    let mut row_start = vec![0usize; n + 1];
    for i in 0..n {
        row_start[i + 1] = row_start[i] + (i - first[i] + 1);
    }
    let mut vals = vec![0.0; row_start[n]];

    // Scatter the lower triangle of the permuted matrix into the envelope.
    for i in 0..n {
        let (cols, avals) = a.row(perm[i]);
        for (&c, &v) in cols.iter().zip(avals) {
            let nc = iperm[c];
            if nc <= i {
                vals[row_start[i] + (nc - first[i])] = v;
            }
        }
    }

    // In-place envelope factorization.
    for i in 0..n {
        let fi = first[i];
        for j in fi..i {
            let fj = first[j];
            let lo = fi.max(fj);
            let mut sum = vals[row_start[i] + (j - fi)];
            for k in lo..j {
                sum -= vals[row_start[i] + (k - fi)] * vals[row_start[j] + (k - fj)];
            }
            vals[row_start[i] + (j - fi)] = sum / vals[row_start[j] + (j - fj)];
        }
        let mut d = vals[row_start[i] + (i - fi)];
        for k in fi..i {
            let l = vals[row_start[i] + (k - fi)];
            d -= l * l;
        }
        if d <= 0.0 {
            return Err(Error::NotSpd(format!(
                "envelope Cholesky pivot {d:.3e} at permuted row {i}"
            )));
        }
        vals[row_start[i] + (i - fi)] = d.sqrt();
    }

    Ok(EnvelopeCholesky {
        n,
        perm,
        first,
        row_start,
        vals,
    })
}

impl EnvelopeCholesky {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor (envelope size incl. diagonal): the fill
    /// measure reported by diagnostics.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // L y' = y
        for i in 0..n {
            let fi = self.first[i];
            let mut sum = y[i];
            for k in fi..i {
                sum -= self.vals[self.row_start[i] + (k - fi)] * y[k];
            }
            y[i] = sum / self.vals[self.row_start[i] + (i - fi)];
        }
        // L^T x' = y' by column sweeps
        for j in (0..n).rev() {
            let fj = self.first[j];
            y[j] /= self.vals[self.row_start[j] + (j - fj)];
            let yj = y[j];
            for k in fj..j {
                y[k] -= self.vals[self.row_start[j] + (k - fj)] * yj;
            }
        }
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }
}

/// Deterministic pseudo-random unit vector (splitmix64), used as the Lanczos
/// start so condition estimates are reproducible without an RNG dependency.
fn seeded_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n as u64)
        .map(|i| {
            let mut z = seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(i + 1));
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) - 0.5
        })
        .collect();
    let norm = par::norm(&v).max(1e-300);
    for vi in &mut v {
        *vi /= norm;
    }
    v
}

/// Largest eigenvalue of a symmetric tridiagonal matrix via Sturm-sequence
/// bisection.
fn tridiag_lambda_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    if k == 1 {
        return alpha[0];
    }
    let mut hi = f64::MIN;
    let mut lo = f64::MAX;
    for i in 0..k {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i < k - 1 { beta[i].abs() } else { 0.0 };
        hi = hi.max(alpha[i] + left + right);
        lo = lo.min(alpha[i] - left - right);
    }
    let count_less = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..k {
            let off = if i > 0 { beta[i - 1] * beta[i - 1] / d } else { 0.0 };
            d = alpha[i] - x - off;
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let (mut lo, mut hi) = (lo - 1e-12 * scale, hi + 1e-12 * scale);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if count_less(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lanczos iteration with full reorthogonalization; returns the largest
/// eigenvalue estimate of the operator.
fn lanczos_lambda_max<F: FnMut(&[f64], &mut [f64])>(n: usize, mut op: F, steps: usize) -> f64 {
    let steps = steps.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![seeded_unit_vector(n, 0x5eed)];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    for j in 0..steps {
        let v = basis[j].clone();
        op(&v, &mut w);
        if j > 0 {
            let b = beta[j - 1];
            let prev = &basis[j - 1];
            for k in 0..n {
                w[k] -= b * prev[k];
            }
        }
        let a = par::dot(&w, &v);
        alpha.push(a);
        for k in 0..n {
            w[k] -= a * v[k];
        }
        // Full reorthogonalization for numerical stability.
        for q in &basis {
            let proj = par::dot(&w, q);
            for k in 0..n {
                w[k] -= proj * q[k];
            }
        }
        let b = par::norm(&w);
        if j + 1 == steps || b < 1e-13 * alpha[0].abs().max(1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|&x| x / b).collect());
    }
    tridiag_lambda_max(&alpha, &beta)
}

/// Spectral condition number estimate of an SPD matrix.
///
/// The largest eigenvalue comes from plain Lanczos (at most 200 steps, full
/// reorthogonalization); the smallest from Lanczos on the inverse operator
/// realized by an envelope Cholesky solve, which resolves the tiny
/// eigenvalues that badly cut configurations produce. With `jacobi_scaled`
/// the estimate applies to the symmetrically scaled matrix
/// D^{-1/2} A D^{-1/2} (same spectrum as D^{-1} A).
pub fn estimate_condition(a: &SparseMatrix, jacobi_scaled: bool) -> Result<f64> {
    a.require_square()?;
    let n = a.n_rows();
    if n == 0 {
        return Err(Error::SizeMismatch("empty matrix".into()));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let work;
    let s: &SparseMatrix = if jacobi_scaled {
        let d = a.diag();
        if let Some(i) = d.iter().position(|&v| v <= 0.0) {
            return Err(Error::NotSpd(format!(
                "nonpositive diagonal {:.3e} at row {i}",
                d[i]
            )));
        }
        let scale: Vec<f64> = d.iter().map(|&v| 1.0 / v.sqrt()).collect();
        work = a.scale_rows_cols(&scale);
        &work
    } else {
        a
    };
    let steps = 200;
    let lambda_max = lanczos_lambda_max(n, |x, y| s.matvec_into(x, y), steps);
    let factor = sparse_cholesky_bfs(s, &OrderingGraph::singletons_from_pattern(s))?;
    let inv_lambda_max = lanczos_lambda_max(n, |x, y| factor.solve_into(x, y), steps);
    if inv_lambda_max <= 0.0 || lambda_max <= 0.0 {
        return Err(Error::NotSpd(
            "nonpositive Lanczos eigenvalue estimate".into(),
        ));
    }
    Ok(lambda_max * inv_lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    /// Deterministic SPD test matrix: M^T M + n I with entries from a simple
    /// linear congruential sequence.
    fn random_spd(n: usize, seed: u64) -> SparseMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let m: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| next()).collect())
            .collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m[k][i] * m[k][j];
                }
                a[i][j] = s + if i == j { n as f64 } else { 0.0 };
            }
        }
        SparseMatrix::from_dense(&a)
    }

    #[test]
    fn gauss_seidel_hand_iteration() {
        let a = tridiag(3);
        let b = vec![1.0; 3];
        let mut x = vec![0.0; 3];
        gauss_seidel_sweep(&a, &mut x, &b, SweepDirection::Forward).unwrap();
        assert_eq!(x, vec![0.5, 0.75, 0.875]);
        let mut x = vec![0.0; 3];
        gauss_seidel_sweep(&a, &mut x, &b, SweepDirection::Backward).unwrap();
        assert_eq!(x, vec![0.875, 0.75, 0.5]);
    }

    #[test]
    fn gauss_seidel_diagonal_solves_exactly() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let mut x = vec![0.0; 2];
        gauss_seidel_sweep(&a, &mut x, &[2.0, 8.0], SweepDirection::Forward).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn gauss_seidel_keeps_exact_solution_fixed() {
        let a = tridiag(5);
        let x_true: Vec<f64> = (0..5).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&x_true);
        let mut x = x_true.clone();
        gauss_seidel_sweep(&a, &mut x, &b, SweepDirection::Forward).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_seidel_rejects_zero_diagonal() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let mut x = vec![0.0; 2];
        let err = gauss_seidel_sweep(&a, &mut x, &[1.0, 1.0], SweepDirection::Forward);
        assert!(matches!(err, Err(Error::ZeroDiagonal(0))));
    }

    #[test]
    fn pcg_identity_and_diagonal_converge_in_one_iteration() {
        let b = vec![3.0, -1.0, 2.0];
        let out = pcg_jacobi(&SparseMatrix::identity(3), &b, 1e-12, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);

        let d = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 8.0]]);
        let out = pcg_jacobi(&d, &[4.0, 16.0], 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.x[0] - 2.0).abs() < 1e-14 && (out.x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pcg_matches_direct_solve() {
        let a = random_spd(50, 7);
        let x_true: Vec<f64> = (0..50).map(|i| ((i * i) as f64 * 0.01).cos()).collect();
        let b = a.matvec(&x_true);
        let out = pcg_jacobi(&a, &b, 1e-12, 500).unwrap();
        assert!(out.converged);
        for (xi, ti) in out.x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-8);
        }
    }

    #[test]
    fn pcg_zero_rhs_short_circuits() {
        let out = pcg_jacobi(&tridiag(4), &[0.0; 4], 1e-10, 10).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0; 4]);
    }

    #[test]
    fn pcg_flags_indefinite_matrix() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 3.0], vec![3.0, 1.0]]);
        // Diagonal is positive but the matrix is indefinite; negative
        // curvature must surface as an error rather than garbage.
        let err = pcg_jacobi(&a, &[1.0, -1.0], 1e-10, 10);
        assert!(matches!(err, Err(Error::NotSpd(_))));
    }

    #[test]
    fn envelope_cholesky_diagonal_and_tridiagonal() {
        let d = SparseMatrix::from_dense(&[vec![4.0, 0.0], vec![0.0, 9.0]]);
        let f = sparse_cholesky_bfs(&d, &OrderingGraph::singletons_from_pattern(&d)).unwrap();
        assert_eq!(f.nnz(), 2);
        assert_eq!(f.solve(&[8.0, 27.0]), vec![2.0, 3.0]);

        let t = tridiag(20);
        let f = sparse_cholesky_bfs(&t, &OrderingGraph::singletons_from_pattern(&t)).unwrap();
        // Tridiagonal envelope: no fill beyond the codiagonal.
        assert_eq!(f.nnz(), 39);
        let x_true: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&t.matvec(&x_true));
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_cholesky_matches_dense_on_random_spd() {
        let a = random_spd(30, 99);
        let f = sparse_cholesky_bfs(&a, &OrderingGraph::singletons_from_pattern(&a)).unwrap();
        let fd = dense::DenseCholesky::from_sparse(&a).unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3).cos()).collect();
        let x = f.solve(&b);
        let xd = fd.solve(&b);
        for (xi, ti) in x.iter().zip(&xd) {
            assert!((xi - ti).abs() < 1e-10);
        }
    }

    #[test]
    fn bfs_ordering_recovers_band_structure() {
        // Path graph with scrambled labels: natural order has a huge
        // envelope, BFS order recovers the tridiagonal band.
        let n = 64;
        let label = |i: usize| (i * 37) % n; // 37 coprime to 64
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label(i), label(i), 4.0));
            if i + 1 < n {
                t.push((label(i), label(i + 1), -1.0));
                t.push((label(i + 1), label(i), -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let f = sparse_cholesky_bfs(&a, &OrderingGraph::singletons_from_pattern(&a)).unwrap();
        assert!(
            f.nnz() <= 3 * n,
            "BFS envelope should be a narrow band, got {}",
            f.nnz()
        );
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).sin()).collect();
        let x = f.solve(&a.matvec(&x_true));
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-11);
        }
    }

    #[test]
    fn block_ordering_keeps_pairs_adjacent() {
        // Two-DOF blocks on a path of 4 nodes; solving must still be exact
        // and the permutation must keep each block contiguous.
        let n = 8;
        let a = random_spd(n, 3);
        let blocks: Vec<Vec<usize>> = vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 7]];
        let adj = vec![vec![1], vec![0, 2], vec![1, 3], vec![2]];
        let graph = OrderingGraph {
            blocks: blocks.clone(),
            adj,
        };
        let f = sparse_cholesky_bfs(&a, &graph).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let x = f.solve(&a.matvec(&x_true));
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-10);
        }
        // Block members occupy consecutive permuted slots.
        for block in &blocks {
            let p0 = f.perm.iter().position(|&v| v == block[0]).unwrap();
            let p1 = f.perm.iter().position(|&v| v == block[1]).unwrap();
            assert_eq!(p1, p0 + 1, "block {block:?} split by the permutation");
        }
    }

    #[test]
    fn condition_estimate_identities() {
        assert!((estimate_condition(&SparseMatrix::identity(12), false).unwrap() - 1.0).abs() < 1e-9);
        // Any positive diagonal matrix scales to the identity.
        let d = SparseMatrix::from_dense(&[
            vec![5.0, 0.0, 0.0],
            vec![0.0, 0.01, 0.0],
            vec![0.0, 0.0, 300.0],
        ]);
        assert!((estimate_condition(&d, true).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn condition_estimate_matches_dense_oracle() {
        // 1D Dirichlet Laplacian, n = 10: eigenvalues known in closed form.
        let n = 10;
        let t = tridiag(n);
        let eig = dense::sym_eigenvalues_sparse(&t);
        let exact = eig[n - 1] / eig[0];
        let est = estimate_condition(&t, false).unwrap();
        assert!(
            (est - exact).abs() <= 0.05 * exact,
            "estimate {est} vs dense {exact}"
        );

        let a = random_spd(40, 11);
        let d = a.diag();
        let scale: Vec<f64> = d.iter().map(|&v| 1.0 / v.sqrt()).collect();
        let scaled = a.scale_rows_cols(&scale);
        let eig = dense::sym_eigenvalues_sparse(&scaled);
        let exact = eig[39] / eig[0];
        let est = estimate_condition(&a, true).unwrap();
        assert!(
            (est - exact).abs() <= 0.05 * exact,
            "scaled estimate {est} vs dense {exact}"
        );
    }
}
