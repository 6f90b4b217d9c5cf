//! Dense kernels for small matrices: the coarsest-level direct solve and
//! eigenvalue computations used by diagnostics and tests. Row-major flat
//! storage; sizes here are at most a few hundred.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    /// Lower factor, row-major.
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::NotSpd(format!(
                            "dense Cholesky pivot {sum:.3e} at row {i}"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn from_sparse(a: &SparseMatrix) -> Result<Self> {
        a.require_square()?;
        let n = a.n_rows();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[i * n + c] = v;
            }
        }
        Self::new(&dense, n)
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let (n, l) = (self.n, &self.l);
        x.copy_from_slice(b);
        for i in 0..n {
            for k in 0..i {
                x[i] -= l[i * n + k] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= l[k * n + i] * x[k];
            }
            x[i] /= l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending. Intended for small diagnostic problems and test oracles.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).fold(1e-300, f64::max);
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        debug_assert!(sweep < 99, "Jacobi eigensolver did not converge");
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

pub fn sym_eigenvalues_sparse(a: &SparseMatrix) -> Vec<f64> {
    let n = a.n_rows();
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            dense[i * n + c] = v;
        }
    }
    sym_eigenvalues(&dense, n)
}
