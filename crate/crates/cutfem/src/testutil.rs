//! Shared helpers for unit tests: deterministic low-discrepancy sequences
//! used as independent integration oracles.

/// Radical-inverse (van der Corput) value of `index` in the given base;
/// pairs/triples over coprime bases form a Halton sequence covering [0,1)^d
/// far more evenly than pseudo-random points, so integral oracles converge
/// with fewer samples while staying fully deterministic.
pub fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base2_prefix() {
        let expect = [0.5, 0.25, 0.75, 0.125, 0.625];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(halton(i + 1, 2), e);
        }
    }

    #[test]
    fn halton_integrates_a_polynomial() {
        // ∫₀¹ x² dx = 1/3 with 20k points to ~1e-4.
        let n = 20_000;
        let sum: f64 = (1..=n).map(|i| halton(i, 2).powi(2)).sum();
        assert!((sum / n as f64 - 1.0 / 3.0).abs() < 1e-4);
    }
}
