//! Concave gauges `f: ℝ₊ → ℝ₊` with `f(0) = 0`, spectral sums built from them,
//! and the signed derivative matrix `M_π` of a symmetric matrix.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, LabError, Result};
use crate::linalg::{singular_values, sym_eig, DenseMatrix};

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeKind {
    /// `x ↦ xᵖ`, `p ∈ (0, 1]`.
    Power { p: f64 },
    /// `x ↦ min{(f(δ)/δ)·x, f(x)}`: linear below `δ`, equal to `f` above.
    Capped { base: Box<ConcaveGauge>, delta: f64 },
    /// Slope `slopes[i]` on `[breakpoints[i-1], breakpoints[i])` with an
    /// implicit first breakpoint at 0. With one slope per breakpoint the gauge
    /// is constant past the last breakpoint; an extra trailing slope continues
    /// past it instead.
    PiecewiseLinear { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

/// A validated concave gauge. Construct through [`ConcaveGauge::power`],
/// [`ConcaveGauge::capped`], [`ConcaveGauge::piecewise_linear`] or by parsing
/// a spec string such as `"capped:power:0.5:delta=0.01"`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcaveGauge {
    kind: GaugeKind,
}

impl ConcaveGauge {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return invalid(format!("power exponent must lie in (0, 1], got {p}"));
        }
        Ok(Self {
            kind: GaugeKind::Power { p },
        })
    }

    pub fn capped(base: ConcaveGauge, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return invalid(format!("cap delta must be positive and finite, got {delta}"));
        }
        Ok(Self {
            kind: GaugeKind::Capped {
                base: Box::new(base),
                delta,
            },
        })
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() {
            return invalid("piecewise-linear gauge needs at least one breakpoint");
        }
        if slopes.len() != breakpoints.len() && slopes.len() != breakpoints.len() + 1 {
            return invalid(format!(
                "{} breakpoints need {} or {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            ));
        }
        if breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0)) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be positive, finite and strictly increasing");
        }
        if slopes.iter().any(|s| !(s.is_finite() && *s > 0.0)) || slopes.windows(2).any(|w| w[0] < w[1]) {
            return invalid("slopes must be positive, finite and nonincreasing");
        }
        Ok(Self {
            kind: GaugeKind::PiecewiseLinear { breakpoints, slopes },
        })
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    /// `f(x)` for `x ≥ 0`.
    pub fn apply(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0, "gauge evaluated at negative {x}");
        match &self.kind {
            GaugeKind::Power { p } => {
                if *p == 1.0 {
                    x
                } else {
                    x.powf(*p)
                }
            }
            GaugeKind::Capped { base, delta } => {
                let slope = base.apply(*delta) / delta;
                (slope * x).min(base.apply(x))
            }
            GaugeKind::PiecewiseLinear { breakpoints, slopes } => {
                let mut acc = 0.0;
                let mut left = 0.0;
                for (i, &b) in breakpoints.iter().enumerate() {
                    if x <= b {
                        return acc + slopes[i] * (x - left);
                    }
                    acc += slopes[i] * (b - left);
                    left = b;
                }
                acc + slopes.get(breakpoints.len()).map_or(0.0, |s| s * (x - left))
            }
        }
    }

    /// Checked `f(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return invalid(format!("gauge argument must be nonnegative, got {x}"));
        }
        Ok(self.apply(x))
    }

    /// Extended right derivative `d̄_f(x)`; `+∞` at 0 for `Power(p < 1)`.
    ///
    /// At 0 this is the limit of right derivatives as `x ↘ 0`, which exists by
    /// monotonicity of difference quotients of a concave function.
    pub fn right_derivative(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match &self.kind {
            GaugeKind::Power { p } => {
                if *p == 1.0 {
                    1.0
                } else if x == 0.0 {
                    f64::INFINITY
                } else {
                    p * x.powf(p - 1.0)
                }
            }
            GaugeKind::Capped { base, delta } => {
                if x < *delta {
                    base.apply(*delta) / delta
                } else {
                    base.right_derivative(x)
                }
            }
            GaugeKind::PiecewiseLinear { breakpoints, slopes } => {
                let segment = breakpoints.iter().take_while(|&&b| b <= x).count();
                slopes.get(segment).copied().unwrap_or(0.0)
            }
        }
    }

    /// `d̄_f(0) < +∞`.
    pub fn is_well_behaved(&self) -> bool {
        self.right_derivative(0.0).is_finite()
    }

    fn require_well_behaved(&self) -> Result<()> {
        if self.is_well_behaved() {
            Ok(())
        } else {
            Err(LabError::NotWellBehaved(self.to_string()))
        }
    }

    /// `Σᵢ f(σᵢ)`.
    pub fn sum_over(&self, sigma: &[f64]) -> f64 {
        sigma.iter().map(|&s| self.apply(s)).sum()
    }
}

impl fmt::Display for ConcaveGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GaugeKind::Power { p } => write!(f, "power:{p}"),
            GaugeKind::Capped { base, delta } => write!(f, "capped:{base}:delta={delta}"),
            GaugeKind::PiecewiseLinear { breakpoints, slopes } => {
                let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "pwl:{}:{}", join(breakpoints), join(slopes))
            }
        }
    }
}

impl FromStr for ConcaveGauge {
    type Err = LabError;

    /// Accepts `power:P`, `capped:<gauge>:delta=D` and `pwl:B1,B2,..:S1,S2,..`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| LabError::Parse(format!("bad number `{s}` in gauge `{spec}`: {e}")))
        };
        if let Some(rest) = spec.strip_prefix("power:") {
            return Self::power(num(rest)?);
        }
        if let Some(rest) = spec.strip_prefix("capped:") {
            let (base, delta) = rest
                .rsplit_once(":delta=")
                .ok_or_else(|| LabError::Parse(format!("capped gauge `{spec}` lacks `:delta=`")))?;
            return Self::capped(base.parse()?, num(delta)?);
        }
        if let Some(rest) = spec.strip_prefix("pwl:") {
            let (bps, slopes) = rest
                .split_once(':')
                .ok_or_else(|| LabError::Parse(format!("pwl gauge `{spec}` needs `breakpoints:slopes`")))?;
            let list = |s: &str| s.split(',').map(num).collect::<Result<Vec<f64>>>();
            return Self::piecewise_linear(list(bps)?, list(slopes)?);
        }
        Err(LabError::Parse(format!("unknown gauge spec `{spec}`")))
    }
}

/// Checked `f(x)`.
pub fn gauge_eval(f: &ConcaveGauge, x: f64) -> Result<f64> {
    f.eval(x)
}

/// Checked `d̄_f(x)`.
pub fn gauge_right_derivative(f: &ConcaveGauge, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return invalid(format!("derivative argument must be nonnegative, got {x}"));
    }
    Ok(f.right_derivative(x))
}

/// `‖X‖_p = (Σ σᵢᵖ)^{1/p}` for `p ∈ (0, 1]`.
pub fn schatten_quasi_norm(x: &DenseMatrix, p: f64) -> Result<f64> {
    let f = ConcaveGauge::power(p)?;
    Ok(f.sum_over(&singular_values(x)?).powf(1.0 / p))
}

/// `Σᵢ f(σᵢ(X))`.
pub fn gauge_sum(x: &DenseMatrix, f: &ConcaveGauge) -> Result<f64> {
    Ok(f.sum_over(&singular_values(x)?))
}

/// `Σᵢ |f(σᵢ(A)) − f(σᵢ(B))|`.
pub fn perturbation_lhs(a: &DenseMatrix, b: &DenseMatrix, f: &ConcaveGauge) -> Result<f64> {
    require_same_shape(a, b)?;
    Ok(spectral_gap_sum(&singular_values(a)?, &singular_values(b)?, f))
}

pub(crate) fn spectral_gap_sum(sa: &[f64], sb: &[f64], f: &ConcaveGauge) -> f64 {
    sa.iter().zip(sb).map(|(&x, &y)| (f.apply(x) - f.apply(y)).abs()).sum()
}

pub(crate) fn require_same_shape(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return invalid(format!("shape mismatch: {:?} vs {:?}", a.shape(), b.shape()));
    }
    Ok(())
}

/// Order of eigen-indices (into the descending `λ`) by `|λ|` descending,
/// ties broken by index. Entry `i` is `πᵢ` with `σᵢ = |λ_{πᵢ}|`, 0-based.
pub fn sorting_permutation(lambda: &[f64]) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..lambda.len()).collect();
    pi.sort_by(|&i, &j| lambda[j].abs().total_cmp(&lambda[i].abs()));
    pi
}

/// Spectrum-sorting permutation of a symmetric matrix (0-based, into the
/// descending eigenvalues returned by [`sym_eig`]).
pub fn spectrum_sorting_permutation(m: &DenseMatrix) -> Result<Vec<usize>> {
    Ok(sorting_permutation(&sym_eig(m)?.lambda))
}

/// `M_π = U · Diag(s) · Uᵀ` with `sᵢ = sgn(λ_{πᵢ}) · d̄_f(σᵢ)`.
#[derive(Clone, Debug)]
pub struct SignedDerivativeMatrix {
    pub matrix: DenseMatrix,
    /// Spectrum-sorting permutation used, 0-based.
    pub permutation: Vec<usize>,
    /// `sgn(λ_{πᵢ})` with `sgn(0) = 0`.
    pub signs: Vec<f64>,
    /// `sᵢ`.
    pub weights: Vec<f64>,
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn signed_derivative_matrix(m: &DenseMatrix, f: &ConcaveGauge) -> Result<SignedDerivativeMatrix> {
    f.require_well_behaved()?;
    let eig = sym_eig(m)?;
    let permutation = sorting_permutation(&eig.lambda);
    let n = m.rows();
    let mut signs = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut matrix = DenseMatrix::zeros(n, n);
    for &k in &permutation {
        let lam = eig.lambda[k];
        let s = sgn(lam);
        let w = s * f.right_derivative(lam.abs());
        signs.push(s);
        weights.push(w);
        if w == 0.0 {
            continue;
        }
        let u = eig.u.column(k);
        for r in 0..n {
            let ur = w * u[r];
            for c in 0..n {
                matrix[(r, c)] += ur * u[c];
            }
        }
    }
    Ok(SignedDerivativeMatrix {
        matrix,
        permutation,
        signs,
        weights,
    })
}
