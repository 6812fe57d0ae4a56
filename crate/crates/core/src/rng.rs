//! Deterministic random streams.
//!
//! Every experiment draws from `Xoshiro256PlusPlus` seeded through SplitMix64
//! (the reference `seed_from_u64` expansion). Uniforms use the top 53 bits of
//! each output: `(x >> 11) · 2⁻⁵³`. Normals use the cosine branch of
//! Box–Muller on two consecutive uniforms, `√(−2 ln(1 − u₁)) · cos(2π u₂)`,
//! with no caching, so any language with the same generator reproduces the
//! exact stream.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::DenseMatrix;

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Stream for trial `index` of a campaign seeded with `seed`.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        Self::new(seed.wrapping_add(index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (`n > 0`), by multiply-shift on 64 bits.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// `rows × cols` matrix of iid `N(0, 1)` entries, filled row-major.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| self.normal()).collect();
        DenseMatrix::from_vec_unchecked(rows, cols, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let a: Vec<u64> = {
            let mut r = SeededRng::new(42);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SeededRng::new(42);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_in_unit_interval_and_normal_moments() {
        let mut r = SeededRng::new(7);
        let n = 20_000;
        let mut mean = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let z = r.normal();
            mean += z;
            sq += z * z;
        }
        mean /= n as f64;
        sq /= n as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((sq - 1.0).abs() < 0.05, "second moment {sq}");
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = SeededRng::new(3);
        for _ in 0..1000 {
            assert!(r.below(5) < 5);
        }
    }
}
