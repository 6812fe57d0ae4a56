//! Monte Carlo lower bounds on restricted isometry constants and the
//! sufficient recovery conditions stated in terms of them.

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::rng::SeededRng;

use super::operator::MeasurementOperator;

/// Constant in the sufficient condition `p < min{1, 1.0873·(1 − α₂ₖ)}`.
pub const RIP_THRESHOLD_CONSTANT: f64 = 1.0873;

fn sample_unit_low_rank(m: usize, n: usize, r: usize, rng: &mut SeededRng) -> DenseMatrix {
    loop {
        let x = rng.gaussian_matrix(m, r).matmul(&rng.gaussian_matrix(r, n));
        let norm = x.frobenius_norm();
        if norm > 0.0 {
            return x.scale(1.0 / norm);
        }
    }
}

fn sampled_distortion(
    op: &MeasurementOperator,
    r: usize,
    trials: usize,
    seed: u64,
    distortion: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    let (m, n) = op.input_shape();
    if r == 0 || r > m.min(n) {
        return invalid(format!("rank {r} out of range for {m}x{n}"));
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let mut rng = SeededRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = sample_unit_low_rank(m, n, r, &mut rng);
        worst = worst.max(distortion(&op.apply(&x)));
    }
    Ok(worst)
}

/// `max |‖𝒜(X)‖₂² − 1|` over sampled unit-Frobenius `X` of rank `≤ r`.
/// A lower bound on the true constant `α_r`.
pub fn rip_estimate(op: &MeasurementOperator, r: usize, trials: usize, seed: u64) -> Result<f64> {
    sampled_distortion(op, r, trials, seed, |y| {
        (y.iter().map(|v| v * v).sum::<f64>() - 1.0).abs()
    })
}

/// `max |Σ|𝒜(X)ᵢ|ᵖ − 1|` over sampled unit-Frobenius `X` of rank `≤ r`.
/// A lower bound on the true constant `β_{p,r}`.
pub fn rip_p_estimate(op: &MeasurementOperator, p: f64, r: usize, trials: usize, seed: u64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    sampled_distortion(op, r, trials, seed, |y| {
        (y.iter().map(|v| v.abs().powf(p)).sum::<f64>() - 1.0).abs()
    })
}

/// Whether `p < min{1, 1.0873·(1 − α₂ₖ)}`.
pub fn recovery_threshold_check(alpha_2k: f64, p: f64) -> Result<bool> {
    if !(alpha_2k > 0.0 && alpha_2k < 1.0) {
        return invalid(format!("alpha_2k must lie in (0, 1), got {alpha_2k}"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    Ok(p < 1f64.min(RIP_THRESHOLD_CONSTANT * (1.0 - alpha_2k)))
}

/// Whether `β_{p,ak} + b·β_{p,(a+1)k} < b − 1`.
pub fn csrip_threshold_check(beta_ak: f64, beta_a1k: f64, b: f64) -> Result<bool> {
    if !(b > 1.0 && b.is_finite()) {
        return invalid(format!("b must exceed 1, got {b}"));
    }
    Ok(beta_ak + b * beta_a1k < b - 1.0)
}

/// `a = ⌈b^{2/(2−p)}·k⌉ / k`, the rank multiplier paired with `b`.
pub fn csrip_expansion_factor(b: f64, p: f64, k: usize) -> Result<f64> {
    if !(b > 1.0 && b.is_finite()) {
        return invalid(format!("b must exceed 1, got {b}"));
    }
    if !(p > 0.0 && p <= 1.0) || k == 0 {
        return invalid("need p in (0, 1] and k ≥ 1");
    }
    Ok((b.powf(2.0 / (2.0 - p)) * k as f64).ceil() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr;
    use crate::recovery::gaussian_operator;

    #[test]
    fn isometry_has_zero_distortion() {
        let q = qr(&SeededRng::new(1).gaussian_matrix(6, 6)).0;
        let op = MeasurementOperator::from_matrix(q, 2, 3).unwrap();
        assert!(rip_estimate(&op, 2, 50, 3).unwrap() < 1e-12);
    }

    #[test]
    fn single_measurement_loses_mass() {
        let op = gaussian_operator(4, 4, 1, 5).unwrap();
        assert!(rip_estimate(&op, 1, 200, 0).unwrap() > 0.9);
    }

    #[test]
    fn more_trials_never_lower_estimate() {
        let op = gaussian_operator(4, 4, 20, 5).unwrap();
        let small = rip_estimate(&op, 2, 50, 9).unwrap();
        let large = rip_estimate(&op, 2, 500, 9).unwrap();
        assert!(large >= small);
        let small = rip_p_estimate(&op, 0.5, 2, 50, 9).unwrap();
        let large = rip_p_estimate(&op, 0.5, 2, 500, 9).unwrap();
        assert!(large >= small);
    }

    #[test]
    fn threshold_examples() {
        assert!(recovery_threshold_check(0.5, 0.5).unwrap());
        assert!(!recovery_threshold_check(0.99, 0.5).unwrap());
        assert!(!recovery_threshold_check(0.01, 1.0).unwrap());
        assert!(recovery_threshold_check(0.0, 0.5).is_err());
        assert!(recovery_threshold_check(1.0, 0.5).is_err());
        assert!(csrip_threshold_check(0.1, 0.1, 2.0).unwrap());
        assert!(!csrip_threshold_check(0.5, 0.5, 2.0).unwrap());
        assert!(!csrip_threshold_check(0.5, 0.25, 2.0).unwrap());
        assert!(csrip_threshold_check(0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn expansion_factor() {
        // b = 4, p = 1: b² = 16, so a = 16 for any k.
        assert_eq!(csrip_expansion_factor(4.0, 1.0, 3).unwrap(), 16.0);
        assert!(csrip_expansion_factor(1.0, 0.5, 1).is_err());
    }
}
