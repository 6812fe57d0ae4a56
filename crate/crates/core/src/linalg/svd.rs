//! One-sided Jacobi SVD.
//!
//! Works on the columns of the tall orientation of `M` (the transpose is taken
//! when `rows < cols`), rotating column pairs in cyclic order until every pair
//! is orthogonal to relative precision `ORTH_TOL`, or `MAX_SWEEPS` sweeps have
//! run. Column norms are the singular values. Left singular vectors for
//! (numerically) zero singular values, and the trailing `m − n` columns of the
//! full `U`, are filled by Gram–Schmidt against the standard basis, so the zero
//! matrix factors as `I · 0 · I`.

use super::matrix::DenseMatrix;
use crate::error::{invalid, Result};

/// Pairwise orthogonality target `|aₚ·a_q| ≤ ORTH_TOL·‖aₚ‖‖a_q‖`.
pub const ORTH_TOL: f64 = 1e-15;
pub const MAX_SWEEPS: usize = 30;

/// `M = U · [Σ 0] · Vᵀ` with full orthogonal `U` (m×m) and `V` (n×n).
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    /// Descending, nonnegative, length `min(m, n)`.
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactorization {
    pub fn reconstruct(&self) -> DenseMatrix {
        let sigma = DenseMatrix::rect_diag(self.u.rows(), self.v.rows(), &self.sigma);
        self.u.matmul(&sigma).matmul(&self.v.transpose())
    }

    /// Numerical rank with the usual `max(m, n)·ε·σ₁` cutoff.
    pub fn rank(&self) -> usize {
        let cutoff = rank_cutoff(&self.sigma, self.u.rows().max(self.v.rows()));
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }
}

pub(crate) fn rank_cutoff(sigma: &[f64], dim: usize) -> f64 {
    let top = sigma.first().copied().unwrap_or(0.0);
    dim as f64 * f64::EPSILON * top
}

pub fn svd(m: &DenseMatrix) -> Result<SvdFactorization> {
    if !m.is_finite() {
        return invalid("svd input contains non-finite entries");
    }
    if m.rows() >= m.cols() {
        Ok(svd_tall(m))
    } else {
        let t = svd_tall(&m.transpose());
        Ok(SvdFactorization {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// Descending singular values.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.sigma)
}

fn svd_tall(m: &DenseMatrix) -> SvdFactorization {
    let (rows, cols) = m.shape();
    // cols[j] holds column j of the working matrix, vcols[j] column j of V.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= ORTH_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    // Stable: ties keep sweep order.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let cutoff = rank_cutoff(&sigma, rows).max(f64::MIN_POSITIVE);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for (&j, &s) in order.iter().zip(&sigma) {
        if s > cutoff {
            u_cols.push(a[j].iter().map(|x| x / s).collect());
        } else {
            break;
        }
    }
    complete_orthonormal(&mut u_cols, rows);

    let mut u = DenseMatrix::zeros(rows, rows);
    for (j, col) in u_cols.iter().enumerate() {
        u.set_column(j, col);
    }
    let mut vm = DenseMatrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        vm.set_column(k, &v[j]);
    }
    SvdFactorization { u, sigma, v: vm }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extends orthonormal `cols` to a basis of ℝ^dim. Each step projects every
/// standard basis vector off the current span (modified Gram–Schmidt, two
/// passes) and keeps the longest residual, which has norm at least
/// `√((dim − k)/dim)` when `k` columns are present.
pub(crate) fn complete_orthonormal(cols: &mut Vec<Vec<f64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for candidate in 0..dim {
            let mut w = vec![0.0; dim];
            w[candidate] = 1.0;
            for _ in 0..2 {
                for c in cols.iter() {
                    let proj = dot(c, &w);
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= proj * ci;
                    }
                }
            }
            let norm = dot(&w, &w).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, w));
            }
        }
        let (norm, w) = best.expect("dim > 0");
        cols.push(w.iter().map(|x| x / norm).collect());
    }
}
