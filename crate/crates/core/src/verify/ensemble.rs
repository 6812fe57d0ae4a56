use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, LabError, Result};
use crate::gauge::ConcaveGauge;
use crate::linalg::{qr, DenseMatrix};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    /// iid `N(0, 1)` entries.
    GaussianIid,
    /// Product of `m×r` and `r×n` Gaussian factors.
    LowRank(usize),
    /// `GᵀG` for square Gaussian `G`.
    PsdPair,
    /// `(G + Gᵀ)/2`.
    SymmetricPair,
    /// `U · Diag(λ) · Uᵀ` with Haar `U` and forced ties (and `±` pairs) in `λ`.
    RepeatedSpectrum,
}

impl EnsembleKind {
    fn is_square_only(self) -> bool {
        !matches!(self, EnsembleKind::GaussianIid | EnsembleKind::LowRank(_))
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleKind::GaussianIid => write!(f, "gaussian"),
            EnsembleKind::LowRank(r) => write!(f, "lowrank:{r}"),
            EnsembleKind::PsdPair => write!(f, "psd"),
            EnsembleKind::SymmetricPair => write!(f, "symmetric"),
            EnsembleKind::RepeatedSpectrum => write!(f, "repeated"),
        }
    }
}

impl FromStr for EnsembleKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::GaussianIid),
            "psd" => Ok(Self::PsdPair),
            "symmetric" => Ok(Self::SymmetricPair),
            "repeated" => Ok(Self::RepeatedSpectrum),
            _ => match s.strip_prefix("lowrank:") {
                Some(r) => r
                    .parse()
                    .map(Self::LowRank)
                    .map_err(|e| LabError::Parse(format!("bad rank in `{s}`: {e}"))),
                None => Err(LabError::Parse(format!("unknown ensemble `{s}`"))),
            },
        }
    }
}

/// A seeded source of matrix pairs. Trial `i` draws from the stream seeded
/// with `seed + i`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub dims: (usize, usize),
    pub seed: u64,
}

impl Ensemble {
    pub fn new(kind: EnsembleKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return invalid("ensemble dimensions must be positive");
        }
        if kind.is_square_only() && m != n {
            return invalid(format!("{kind} ensemble needs square dimensions, got {m}x{n}"));
        }
        if let EnsembleKind::LowRank(r) = kind {
            if r == 0 || r > m.min(n) {
                return invalid(format!("rank {r} out of range for {m}x{n}"));
            }
        }
        Ok(Self {
            kind,
            dims: (m, n),
            seed,
        })
    }

    pub fn trial_seed(&self, index: u64) -> u64 {
        self.seed.wrapping_add(index)
    }

    /// The pair for trial `index` together with its stream, which callers may
    /// keep drawing from (e.g. for random gauges).
    pub fn trial(&self, index: u64) -> (DenseMatrix, DenseMatrix, SeededRng) {
        let mut rng = SeededRng::for_trial(self.seed, index);
        let (a, b) = self.sample(&mut rng);
        (a, b, rng)
    }

    pub fn sample(&self, rng: &mut SeededRng) -> (DenseMatrix, DenseMatrix) {
        let a = self.sample_one(rng);
        let b = self.sample_one(rng);
        (a, b)
    }

    fn sample_one(&self, rng: &mut SeededRng) -> DenseMatrix {
        let (m, n) = self.dims;
        match self.kind {
            EnsembleKind::GaussianIid => rng.gaussian_matrix(m, n),
            EnsembleKind::LowRank(r) => rng.gaussian_matrix(m, r).matmul(&rng.gaussian_matrix(r, n)),
            EnsembleKind::PsdPair => {
                let g = rng.gaussian_matrix(n, n);
                g.t_matmul(&g).symmetrize()
            }
            EnsembleKind::SymmetricPair => rng.gaussian_matrix(n, n).symmetrize(),
            EnsembleKind::RepeatedSpectrum => repeated_spectrum(n, rng),
        }
    }
}

/// Haar-distributed orthogonal matrix from the QR of a Gaussian matrix.
pub fn haar_orthogonal(n: usize, rng: &mut SeededRng) -> DenseMatrix {
    qr(&rng.gaussian_matrix(n, n)).0
}

fn repeated_spectrum(n: usize, rng: &mut SeededRng) -> DenseMatrix {
    let distinct = n.div_ceil(2).max(1);
    let pool: Vec<f64> = (0..distinct).map(|_| rng.normal()).collect();
    let mut values: Vec<f64> = (0..n)
        .map(|_| {
            let v = pool[rng.below(distinct)];
            if rng.uniform() < 0.25 {
                -v
            } else {
                v
            }
        })
        .collect();
    if n >= 2 {
        values[1] = values[0];
    }
    let u = haar_orthogonal(n, rng);
    u.matmul(&DenseMatrix::diag(&values))
        .matmul(&u.transpose())
        .symmetrize()
}

/// A random concave piecewise-linear gauge with 1–3 breakpoints in roughly
/// `[0.05, 6]` and geometrically decaying slopes.
pub fn random_piecewise_linear(rng: &mut SeededRng) -> ConcaveGauge {
    let count = 1 + rng.below(3);
    let mut breakpoints = Vec::with_capacity(count);
    let mut at = 0.0;
    for _ in 0..count {
        at += 0.05 + 2.0 * rng.uniform();
        breakpoints.push(at);
    }
    let slope_count = count + rng.below(2);
    let mut slopes = Vec::with_capacity(slope_count);
    let mut s = 0.5 + 2.0 * rng.uniform();
    for _ in 0..slope_count {
        slopes.push(s);
        s *= 0.1 + 0.9 * rng.uniform();
    }
    ConcaveGauge::piecewise_linear(breakpoints, slopes).expect("construction satisfies gauge invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, sym_eig};

    #[test]
    fn parse_kinds() {
        for s in ["gaussian", "lowrank:2", "psd", "symmetric", "repeated"] {
            assert_eq!(s.parse::<EnsembleKind>().unwrap().to_string(), s);
        }
        assert!("lowrank:x".parse::<EnsembleKind>().is_err());
        assert!("cauchy".parse::<EnsembleKind>().is_err());
    }

    #[test]
    fn validation() {
        assert!(Ensemble::new(EnsembleKind::PsdPair, 3, 4, 0).is_err());
        assert!(Ensemble::new(EnsembleKind::LowRank(4), 3, 5, 0).is_err());
        assert!(Ensemble::new(EnsembleKind::GaussianIid, 0, 5, 0).is_err());
    }

    #[test]
    fn samples_match_kind() {
        for seed in 0..20 {
            let low = Ensemble::new(EnsembleKind::LowRank(2), 6, 5, seed).unwrap();
            let (a, _, _) = low.trial(0);
            assert!(svd(&a).unwrap().rank() <= 2);

            let psd = Ensemble::new(EnsembleKind::PsdPair, 4, 4, seed).unwrap();
            let (a, b, _) = psd.trial(1);
            for m in [a, b] {
                assert!(m.is_symmetric(0.0));
                assert!(sym_eig(&m).unwrap().lambda.iter().all(|&l| l > -1e-10));
            }

            let rep = Ensemble::new(EnsembleKind::RepeatedSpectrum, 5, 5, seed).unwrap();
            let (a, _, _) = rep.trial(2);
            assert!(a.is_symmetric(0.0));
            let lam = sym_eig(&a).unwrap().lambda;
            let min_gap = lam.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
            assert!(min_gap < 1e-12, "no repeated eigenvalue in {lam:?}");
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let e = Ensemble::new(EnsembleKind::GaussianIid, 3, 4, 99).unwrap();
        assert_eq!(e.trial(5).0, e.trial(5).0);
        assert_ne!(e.trial(5).0, e.trial(6).0);
    }

    #[test]
    fn random_pwl_is_valid() {
        let mut rng = SeededRng::new(4);
        for _ in 0..100 {
            let f = random_piecewise_linear(&mut rng);
            assert!(f.is_well_behaved());
            let round: ConcaveGauge = f.to_string().parse().unwrap();
            assert_eq!(round, f);
        }
    }
}
