//! Sampling checks of the rank-`k` nullspace condition and the failure
//! witness built from any violating nullspace element.
//!
//! Exact verification of the condition is intractable in general, so every
//! function here samples. A returned witness proves that recovery can fail;
//! the absence of one is evidence only.

use crate::error::{invalid, LabError, Result};
use crate::gauge::ConcaveGauge;
use crate::linalg::{svd, DenseMatrix};
use crate::rng::SeededRng;
use crate::verify::haar_orthogonal;

use super::operator::{induced_matrix, nullspace_basis, MeasurementOperator};

/// `Σ_{i>k} σᵢᵖ(Z) − Σ_{i≤k} σᵢᵖ(Z)`; positive when `Z` satisfies the condition.
pub fn nullspace_margin(z: &DenseMatrix, p: f64, k: usize) -> Result<f64> {
    let f = ConcaveGauge::power(p)?;
    let sigma = svd(z)?.sigma;
    if k > sigma.len() {
        return invalid(format!("k = {k} exceeds min(m, n) = {}", sigma.len()));
    }
    Ok(f.sum_over(&sigma[k..]) - f.sum_over(&sigma[..k]))
}

#[derive(Clone, Debug)]
pub struct NullspaceSample {
    pub min_margin: f64,
    /// Unit-Frobenius nullspace element with the smallest margin, when that
    /// margin is `≤ 0`.
    pub witness: Option<DenseMatrix>,
    pub samples: usize,
}

/// Samples `Z = Σ cᵢ Bᵢ` over a nullspace basis with Gaussian `cᵢ`.
pub fn nullspace_condition_sample(
    op: &MeasurementOperator,
    p: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<NullspaceSample> {
    let (m, n) = op.input_shape();
    if !(1 <= k && k < m && m <= n) {
        return invalid(format!("need 1 ≤ k < m ≤ n, got k={k}, m={m}, n={n}"));
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    ConcaveGauge::power(p)?;
    let basis = nullspace_basis(op)?;
    if basis.is_empty() {
        return Err(LabError::EmptyNullspace);
    }
    let mut rng = SeededRng::new(seed);
    let mut min_margin = f64::INFINITY;
    let mut worst = None;
    for _ in 0..trials {
        let mut z = DenseMatrix::zeros(m, n);
        for b in &basis {
            z = &z + &b.scale(rng.normal());
        }
        let norm = z.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let z = z.scale(1.0 / norm);
        let margin = nullspace_margin(&z, p, k)?;
        if margin < min_margin {
            min_margin = margin;
            worst = Some(z);
        }
    }
    Ok(NullspaceSample {
        min_margin,
        witness: worst.filter(|_| min_margin <= 0.0),
        samples: trials,
    })
}

/// Pair `(X̄, X̄′)` with `X̄′ − X̄ = Z`, `rank(X̄) ≤ k` and
/// `‖X̄′‖_p^p ≤ ‖X̄‖_p^p`. Since `𝒜(X̄′) = 𝒜(X̄)`, `X̄` is not the unique
/// minimizer for `y = 𝒜(X̄)`.
#[derive(Clone, Debug)]
pub struct FailureWitness {
    pub xbar: DenseMatrix,
    pub xbar_prime: DenseMatrix,
}

/// Splits `Z = U [Σ 0] Vᵀ` into `X̄ = −U [Σ₁..ₖ 0] Vᵀ` and
/// `X̄′ = U [Σₖ₊₁..ₘ 0] Vᵀ`.
pub fn failure_witness(z: &DenseMatrix, k: usize, p: f64) -> Result<FailureWitness> {
    let f = ConcaveGauge::power(p)?;
    let d = svd(z)?;
    let len = d.sigma.len();
    if k == 0 || k > len {
        return Err(LabError::InvalidWitness(format!("k = {k} outside 1..={len}")));
    }
    let head = f.sum_over(&d.sigma[..k]);
    let tail = f.sum_over(&d.sigma[k..]);
    if head < tail {
        return Err(LabError::InvalidWitness(format!(
            "top-{k} mass {head:e} is below the remaining mass {tail:e}"
        )));
    }
    let (m, n) = z.shape();
    let part = |range: std::ops::Range<usize>, sign: f64| {
        let mut s = vec![0.0; len];
        for i in range {
            s[i] = sign * d.sigma[i];
        }
        d.u.matmul(&DenseMatrix::rect_diag(m, n, &s)).matmul(&d.v.transpose())
    };
    Ok(FailureWitness {
        xbar: part(0..k, -1.0),
        xbar_prime: part(k..len, 1.0),
    })
}

/// `Σ_{rest} |zⱼ|ᵖ − Σ_{top k} |zⱼ|ᵖ` after sorting `|z|` in decreasing order.
pub fn vector_nullspace_margin(z: &[f64], p: f64, k: usize) -> Result<f64> {
    ConcaveGauge::power(p)?;
    if k > z.len() {
        return invalid(format!("k = {k} exceeds vector length {}", z.len()));
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs().powf(p)).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags[k..].iter().sum::<f64>() - mags[..k].iter().sum::<f64>())
}

#[derive(Clone, Debug)]
pub struct PropertyESample {
    /// Smallest vector margin seen over all sampled `(U, V, z)`.
    pub min_margin: f64,
    /// Sampled `(U, V)` pairs.
    pub pairs: usize,
    /// Pairs whose induced matrix was injective (vacuously fine).
    pub injective: usize,
}

/// Samples Haar `(U, V)`, forms `A_{U,V}`, and checks the vector nullspace
/// condition on `vectors_per_pair` random elements of its nullspace.
pub fn property_e_sample(
    op: &MeasurementOperator,
    p: f64,
    k: usize,
    pairs: usize,
    vectors_per_pair: usize,
    seed: u64,
) -> Result<PropertyESample> {
    let (m, n) = op.input_shape();
    if !(1 <= k && k < m && m <= n) {
        return invalid(format!("need 1 ≤ k < m ≤ n, got k={k}, m={m}, n={n}"));
    }
    if pairs == 0 || vectors_per_pair == 0 {
        return invalid("sample counts must be positive");
    }
    ConcaveGauge::power(p)?;
    let mut rng = SeededRng::new(seed);
    let mut min_margin = f64::INFINITY;
    let mut injective = 0;
    for _ in 0..pairs {
        let u = haar_orthogonal(m, &mut rng);
        let v = haar_orthogonal(n, &mut rng);
        let a = induced_matrix(op, &u, &v)?;
        let f = svd(&a)?;
        let rank = f.rank();
        if rank == m {
            injective += 1;
            continue;
        }
        for _ in 0..vectors_per_pair {
            let mut z = vec![0.0; m];
            for j in rank..m {
                let c = rng.normal();
                for (zi, vi) in z.iter_mut().zip(f.v.column(j)) {
                    *zi += c * vi;
                }
            }
            min_margin = min_margin.min(vector_nullspace_margin(&z, p, k)?);
        }
    }
    Ok(PropertyESample {
        min_margin,
        pairs,
        injective,
    })
}
