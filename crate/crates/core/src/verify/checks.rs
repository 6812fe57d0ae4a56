//! Individual inequality checks. Each returns a [`VerificationReport`] whose
//! `lhs`/`rhs` are the two sides of the inequality being tested.

use crate::error::{invalid, Result};
use crate::gauge::{require_same_shape, signed_derivative_matrix, spectral_gap_sum, ConcaveGauge};
use crate::linalg::{dilation, singular_values, sym_eig, DenseMatrix};

use super::report::VerificationReport;

/// Singular values of `A`, `B` and `A − B`, computed once and shared by every
/// gauge-dependent check on the pair.
#[derive(Clone, Debug)]
pub struct PairSpectra {
    pub dims: (usize, usize),
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub diff: Vec<f64>,
}

impl PairSpectra {
    pub fn new(a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        require_same_shape(a, b)?;
        Ok(Self {
            dims: a.shape(),
            a: singular_values(a)?,
            b: singular_values(b)?,
            diff: singular_values(&(a - b))?,
        })
    }

    /// `Σ|f(σᵢ(A)) − f(σᵢ(B))| ≤ Σ f(σᵢ(A−B))`.
    pub fn main_report(&self, f: &ConcaveGauge, tol: f64) -> VerificationReport {
        let lhs = spectral_gap_sum(&self.a, &self.b, f);
        let rhs = f.sum_over(&self.diff);
        VerificationReport::new("main", lhs, rhs, tol, self.dims, f.to_string())
    }

    /// Partial sums over the top `k` singular values (1-based `k`).
    pub fn conjecture_report(&self, f: &ConcaveGauge, k: usize, tol: f64) -> Result<VerificationReport> {
        let l = self.a.len();
        if k == 0 || k > l {
            return invalid(format!("k must lie in 1..={l}, got {k}"));
        }
        let lhs = spectral_gap_sum(&self.a[..k], &self.b[..k], f);
        let rhs = f.sum_over(&self.diff[..k]);
        Ok(VerificationReport::new(
            format!("conjecture_partial@k={k}"),
            lhs,
            rhs,
            tol,
            self.dims,
            f.to_string(),
        ))
    }

    /// One-sided `Σⱼ (f(σ_{iⱼ}(A)) − f(σ_{iⱼ}(B))) ≤ Σ_{i≤k} f(σᵢ(A−B))`.
    pub fn f_lw_report(&self, f: &ConcaveGauge, indices: &[usize], tol: f64) -> Result<VerificationReport> {
        validate_indices(indices, self.a.len())?;
        let lhs = indices.iter().map(|&i| f.apply(self.a[i]) - f.apply(self.b[i])).sum();
        let rhs = f.sum_over(&self.diff[..indices.len()]);
        Ok(VerificationReport::new(
            format!("f_lw@{}", index_label(indices)),
            lhs,
            rhs,
            tol,
            self.dims,
            f.to_string(),
        ))
    }

    /// `Σⱼ |σ_{iⱼ}(A) − σ_{iⱼ}(B)| ≤ Σ_{i≤k} σᵢ(A−B)`.
    pub fn mirsky_report(&self, indices: &[usize], tol: f64) -> Result<VerificationReport> {
        validate_indices(indices, self.a.len())?;
        let lhs = indices.iter().map(|&i| (self.a[i] - self.b[i]).abs()).sum();
        let rhs = self.diff[..indices.len()].iter().sum();
        Ok(VerificationReport::new(
            format!("mirsky@{}", index_label(indices)),
            lhs,
            rhs,
            tol,
            self.dims,
            "-",
        ))
    }
}

/// Indices are 0-based positions into a descending spectrum and must be
/// strictly increasing and nonempty.
pub fn validate_indices(indices: &[usize], len: usize) -> Result<()> {
    if indices.is_empty() {
        return invalid("index set is empty");
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return invalid(format!("indices {indices:?} are not strictly increasing"));
    }
    if indices[indices.len() - 1] >= len {
        return invalid(format!(
            "index {} out of range for spectrum of length {len}",
            indices[indices.len() - 1]
        ));
    }
    Ok(())
}

/// 1-based label, e.g. `1,3`.
fn index_label(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn check_main_inequality(
    a: &DenseMatrix,
    b: &DenseMatrix,
    f: &ConcaveGauge,
    tol: f64,
) -> Result<VerificationReport> {
    Ok(PairSpectra::new(a, b)?.main_report(f, tol))
}

/// Main inequality specialized to `f = xᵖ`.
pub fn check_schatten_p(a: &DenseMatrix, b: &DenseMatrix, p: f64, tol: f64) -> Result<VerificationReport> {
    let f = ConcaveGauge::power(p)?;
    let mut r = check_main_inequality(a, b, &f, tol)?;
    r.check_name = "schatten_p".into();
    Ok(r)
}

pub fn check_mirsky(a: &DenseMatrix, b: &DenseMatrix, indices: &[usize], tol: f64) -> Result<VerificationReport> {
    PairSpectra::new(a, b)?.mirsky_report(indices, tol)
}

/// [`check_mirsky`] over several index sets, sharing one set of SVDs.
pub fn check_mirsky_subsets(
    a: &DenseMatrix,
    b: &DenseMatrix,
    subsets: &[Vec<usize>],
    tol: f64,
) -> Result<Vec<VerificationReport>> {
    let spectra = PairSpectra::new(a, b)?;
    subsets.iter().map(|s| spectra.mirsky_report(s, tol)).collect()
}

struct EigenTriple {
    a: Vec<f64>,
    b: Vec<f64>,
    diff: Vec<f64>,
    n: usize,
}

fn eigen_triple(a: &DenseMatrix, b: &DenseMatrix) -> Result<EigenTriple> {
    require_same_shape(a, b)?;
    for (name, m) in [("A", a), ("B", b)] {
        if !m.is_symmetric(1e-12) {
            return invalid(format!("{name} must be symmetric"));
        }
    }
    Ok(EigenTriple {
        a: sym_eig(a)?.lambda,
        b: sym_eig(b)?.lambda,
        diff: sym_eig(&(a - b))?.lambda,
        n: a.rows(),
    })
}

fn lw_report(t: &EigenTriple, indices: &[usize], tol: f64) -> Result<VerificationReport> {
    validate_indices(indices, t.n)?;
    let lhs = indices.iter().map(|&i| t.a[i] - t.b[i]).sum();
    let rhs = t.diff[..indices.len()].iter().sum();
    Ok(VerificationReport::new(
        format!("lidskii_wielandt@{}", index_label(indices)),
        lhs,
        rhs,
        tol,
        (t.n, t.n),
        "-",
    ))
}

/// `Σⱼ (λ_{iⱼ}(A) − λ_{iⱼ}(B)) ≤ Σ_{i≤k} λᵢ(A − B)` for symmetric `A`, `B`.
pub fn check_lidskii_wielandt(
    a: &DenseMatrix,
    b: &DenseMatrix,
    indices: &[usize],
    tol: f64,
) -> Result<VerificationReport> {
    lw_report(&eigen_triple(a, b)?, indices, tol)
}

pub fn check_lidskii_wielandt_subsets(
    a: &DenseMatrix,
    b: &DenseMatrix,
    subsets: &[Vec<usize>],
    tol: f64,
) -> Result<Vec<VerificationReport>> {
    let t = eigen_triple(a, b)?;
    subsets.iter().map(|s| lw_report(&t, s, tol)).collect()
}

pub fn check_f_lw(
    a: &DenseMatrix,
    b: &DenseMatrix,
    f: &ConcaveGauge,
    indices: &[usize],
    tol: f64,
) -> Result<VerificationReport> {
    PairSpectra::new(a, b)?.f_lw_report(f, indices, tol)
}

/// Top-`k` partial-sum version of the main inequality. Violations are
/// reported, never suppressed.
pub fn check_conjecture_partial(
    a: &DenseMatrix,
    b: &DenseMatrix,
    f: &ConcaveGauge,
    k: usize,
    tol: f64,
) -> Result<VerificationReport> {
    PairSpectra::new(a, b)?.conjecture_report(f, k, tol)
}

/// The four quantities compared by [`check_symmetric_reduction`].
#[derive(Clone, Copy, Debug)]
pub struct ReductionTerms {
    pub lhs: f64,
    pub rhs: f64,
    pub dilated_lhs: f64,
    pub dilated_rhs: f64,
}

impl ReductionTerms {
    /// Largest relative deviation from the factor-2 identities.
    pub fn deviation(&self) -> f64 {
        let rel = |dilated: f64, plain: f64| (dilated - 2.0 * plain).abs() / (1.0 + 2.0 * plain.abs());
        rel(self.dilated_lhs, self.lhs).max(rel(self.dilated_rhs, self.rhs))
    }
}

pub fn symmetric_reduction_terms(a: &DenseMatrix, b: &DenseMatrix, f: &ConcaveGauge) -> Result<ReductionTerms> {
    let plain = PairSpectra::new(a, b)?;
    let lifted = PairSpectra {
        dims: (a.rows() + a.cols(), a.rows() + a.cols()),
        a: singular_values(&dilation(a))?,
        b: singular_values(&dilation(b))?,
        diff: singular_values(&dilation(&(a - b)))?,
    };
    Ok(ReductionTerms {
        lhs: spectral_gap_sum(&plain.a, &plain.b, f),
        rhs: f.sum_over(&plain.diff),
        dilated_lhs: spectral_gap_sum(&lifted.a, &lifted.b, f),
        dilated_rhs: f.sum_over(&lifted.diff),
    })
}

/// Checks `lhs(Ξ(A), Ξ(B)) = 2·lhs(A, B)` and `Σf(σ(Ξ(A−B))) = 2·Σf(σ(A−B))`.
///
/// The report's `lhs` is the largest relative deviation of the two identities
/// and `rhs` is 0, so `holds` means both identities agree to `tol`.
pub fn check_symmetric_reduction(
    a: &DenseMatrix,
    b: &DenseMatrix,
    f: &ConcaveGauge,
    tol: f64,
) -> Result<VerificationReport> {
    let terms = symmetric_reduction_terms(a, b, f)?;
    Ok(VerificationReport::new(
        "symmetric_reduction",
        terms.deviation(),
        0.0,
        tol,
        a.shape(),
        f.to_string(),
    ))
}

/// Residuals `r(t) = Σf(σ(M+tN)) − Σf(σ(M)) − t·tr(N·M_π)` over `t_grid`.
pub fn local_expansion_residuals(
    m: &DenseMatrix,
    n: &DenseMatrix,
    f: &ConcaveGauge,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    require_same_shape(m, n)?;
    if !m.is_square() {
        return invalid("local expansion needs square symmetric matrices");
    }
    let m_pi = signed_derivative_matrix(m, f)?;
    let base = f.sum_over(&singular_values(m)?);
    let slope = n.dot(&m_pi.matrix);
    t_grid
        .iter()
        .map(|&t| {
            let moved = &(m + &n.scale(t)).symmetrize();
            Ok(f.sum_over(&singular_values(moved)?) - base - t * slope)
        })
        .collect()
}

/// Safety factor applied to the fitted second-order constant.
pub const LOCAL_EXPANSION_SAFETY: f64 = 2.0;

/// Checks `r(t) ≤ C·t²` on a decreasing grid of at least three steps.
///
/// `C = 2·max(0, r(t₁)/t₁², r(t₂)/t₂²)` is fitted on the two largest steps and
/// every smaller step is validated against it. The report carries the worst
/// validated step: `lhs = r(t)`, `rhs = C·t²`.
pub fn check_local_expansion(
    m: &DenseMatrix,
    n: &DenseMatrix,
    f: &ConcaveGauge,
    t_grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    if t_grid.len() < 3 {
        return invalid("t_grid needs at least three steps");
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| w[0] <= w[1]) {
        return invalid("t_grid must be positive and strictly decreasing");
    }
    if !m.is_symmetric(1e-12) || !n.is_symmetric(1e-12) {
        return invalid("local expansion needs symmetric M and N");
    }
    let r = local_expansion_residuals(m, n, f, t_grid)?;
    let c = LOCAL_EXPANSION_SAFETY
        * (r[0] / (t_grid[0] * t_grid[0]))
            .max(r[1] / (t_grid[1] * t_grid[1]))
            .max(0.0);
    let (lhs, rhs) = t_grid[2..]
        .iter()
        .zip(&r[2..])
        .map(|(&t, &rt)| (rt, c * t * t))
        .max_by(|x, y| (x.0 - x.1).total_cmp(&(y.0 - y.1)))
        .expect("grid has a validation step");
    Ok(VerificationReport::new(
        "local_expansion",
        lhs,
        rhs,
        tol,
        m.shape(),
        f.to_string(),
    ))
}
