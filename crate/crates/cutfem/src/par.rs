//! Thin data-parallelism layer.
//!
//! With the `parallel` feature (default) the helpers below fan work out via
//! rayon; without it they run the identical arithmetic sequentially. All
//! reductions use fixed chunk boundaries and ordered combination, so results
//! are bitwise identical regardless of feature set or thread count. That
//! keeps experiment output byte-reproducible.
//!
//! Gauss-Seidel sweeps are deliberately *not* routed through this module:
//! their sequential update order is part of the smoother contract.

/// Chunk length for ordered dot-product reduction. Fixed so the summation
/// tree does not depend on thread count.
const DOT_CHUNK: usize = 4096;

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub fn map_indexed<U: Send, F: Fn(usize) -> U + Sync + Send>(n: usize, f: F) -> Vec<U> {
        (0..n).into_par_iter().map(f).collect()
    }

    pub fn map_slice<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
        items.par_iter().map(f).collect()
    }

    pub fn fill_indexed<F: Fn(usize) -> f64 + Sync + Send>(out: &mut [f64], f: F) {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, y)| *y = f(i));
    }

    pub fn chunk_sums(a: &[f64], b: &[f64], chunk: usize) -> Vec<f64> {
        a.par_chunks(chunk)
            .zip(b.par_chunks(chunk))
            .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x * y).sum())
            .collect()
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn map_indexed<U, F: Fn(usize) -> U>(n: usize, f: F) -> Vec<U> {
        (0..n).map(f).collect()
    }

    pub fn map_slice<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
        items.iter().map(f).collect()
    }

    pub fn fill_indexed<F: Fn(usize) -> f64>(out: &mut [f64], f: F) {
        for (i, y) in out.iter_mut().enumerate() {
            *y = f(i);
        }
    }

    pub fn chunk_sums(a: &[f64], b: &[f64], chunk: usize) -> Vec<f64> {
        a.chunks(chunk)
            .zip(b.chunks(chunk))
            .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x * y).sum())
            .collect()
    }
}

pub use imp::{fill_indexed, map_indexed, map_slice};

/// Dot product with deterministic ordered reduction.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    imp::chunk_sums(a, b, DOT_CHUNK).iter().sum()
}

/// Euclidean norm built on the deterministic dot product.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_sequential_reference() {
        let a: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.7).cos()).collect();
        // Reference computed with the same chunking; the helper must agree
        // bitwise no matter how work is scheduled.
        let reference: f64 = a
            .chunks(4096)
            .zip(b.chunks(4096))
            .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        assert_eq!(dot(&a, &b), reference);
    }

    #[test]
    fn fill_indexed_writes_every_slot() {
        let mut out = vec![0.0; 1000];
        fill_indexed(&mut out, |i| i as f64 * 2.0);
        assert!(out.iter().enumerate().all(|(i, &v)| v == i as f64 * 2.0));
    }
}
