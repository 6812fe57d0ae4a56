//! Iteratively reweighted least squares for `min ‖X‖_p^p s.t. ‖𝒜(X) − y‖₂ ≤ η`.
//!
//! Each iteration minimizes `tr(Xᵀ W X)` over the constraint set with
//! `W⁻¹ = (XXᵀ + εI)^{1−p/2}` frozen at the current iterate. This is a
//! majorize–minimize step for the smoothed objective `tr((XXᵀ + εI)^{p/2})`,
//! which therefore never increases. `ε` is held fixed until the iterates
//! settle, then shrunk geometrically down to a floor.

use crate::error::{invalid, LabError, Result};
use crate::linalg::{psd_solve, singular_values, sym_eig, DenseMatrix};

use super::operator::{MeasurementOperator, RecoveryInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct IrlsConfig {
    /// Cap on reweighting iterations over all smoothing levels.
    pub max_iters: usize,
    /// Initial smoothing, relative to `σ₁(X₀)²` of the least-norm start.
    pub eps_init: f64,
    pub eps_shrink: f64,
    /// Smoothing floor, relative like `eps_init`.
    pub eps_min: f64,
    /// Relative change `‖X⁺ − X‖_F / ‖X‖_F` below which a level is done.
    pub inner_tol: f64,
    /// Cap on iterations spent at one smoothing level.
    pub level_iters: usize,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            eps_init: 1.0,
            eps_shrink: 0.1,
            eps_min: 1e-10,
            inner_tol: 1e-8,
            level_iters: 50,
        }
    }
}

impl IrlsConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.level_iters == 0 {
            return invalid("iteration caps must be positive");
        }
        if !(self.eps_init > 0.0 && self.eps_min > 0.0 && self.eps_min <= self.eps_init) {
            return invalid("need 0 < eps_min ≤ eps_init");
        }
        if !(self.eps_shrink > 0.0 && self.eps_shrink < 1.0) {
            return invalid("eps_shrink must lie in (0, 1)");
        }
        if !(self.inner_tol > 0.0) {
            return invalid("inner_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IrlsSolution {
    pub x: DenseMatrix,
    /// Smoothed objective after every iteration; nonincreasing.
    pub surrogate_trace: Vec<f64>,
    pub iterations: usize,
    /// `‖𝒜(X) − y‖₂`.
    pub residual: f64,
}

/// Solves the instance and returns only the estimate.
pub fn irls_solve(instance: &RecoveryInstance, config: &IrlsConfig) -> Result<DenseMatrix> {
    Ok(irls_solve_detailed(instance, config)?.x)
}

pub fn irls_solve_detailed(instance: &RecoveryInstance, config: &IrlsConfig) -> Result<IrlsSolution> {
    config.validate()?;
    let op = &instance.operator;
    let (m, n) = op.input_shape();
    let y = &instance.y;
    let a = op.matrix();
    let p = instance.p;
    let eta = instance.eta;

    let gram = a.matmul(&a.transpose()).symmetrize();
    check_feasible(&gram, y, eta)?;

    let y_norm = norm(y);
    let zero = || IrlsSolution {
        x: DenseMatrix::zeros(m, n),
        surrogate_trace: Vec::new(),
        iterations: 0,
        residual: y_norm,
    };
    if y_norm <= eta || y_norm == 0.0 {
        return Ok(zero());
    }

    let mut x = weighted_step(op, &gram, None, y, eta, config.inner_tol)?;
    let scale = singular_values(&x)?[0].powi(2);
    if scale == 0.0 {
        return Ok(zero());
    }
    let eps_floor = config.eps_min * scale;
    let mut eps = config.eps_init * scale;
    let mut trace = Vec::new();
    let mut level_count = 0;
    let mut iterations = 0;

    while iterations < config.max_iters {
        let w_inv = sym_eig(&(&x.matmul(&x.transpose()) + &DenseMatrix::identity(m).scale(eps)))?
            .apply_fn(|l| l.max(0.0).powf(1.0 - p / 2.0));
        let next = weighted_step(op, &gram, Some(&w_inv), y, eta, config.inner_tol)?;
        iterations += 1;
        level_count += 1;
        let change = (&next - &x).frobenius_norm() / x.frobenius_norm().max(f64::MIN_POSITIVE);
        x = next;
        trace.push(smoothed_objective(&x, eps, p)?);
        if change < config.inner_tol || level_count >= config.level_iters {
            if eps <= eps_floor {
                break;
            }
            eps = (eps * config.eps_shrink).max(eps_floor);
            level_count = 0;
        }
    }

    let residual = norm(&sub(&op.apply(&x), y));
    Ok(IrlsSolution {
        x,
        surrogate_trace: trace,
        iterations,
        residual,
    })
}

/// `tr((XXᵀ + εI)^{p/2})`.
pub fn smoothed_objective(x: &DenseMatrix, eps: f64, p: f64) -> Result<f64> {
    let s = singular_values(x)?;
    let m = x.rows();
    let mut total = 0.0;
    for i in 0..m {
        let si = s.get(i).copied().unwrap_or(0.0);
        total += (si * si + eps).powf(p / 2.0);
    }
    Ok(total)
}

/// Rejects `y` farther than `eta` from the range of `𝒜`.
fn check_feasible(gram: &DenseMatrix, y: &[f64], eta: f64) -> Result<()> {
    let e = sym_eig(gram)?;
    let top = e.lambda.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = gram.rows() as f64 * f64::EPSILON * top * 1e3;
    let mut outside = 0.0;
    for (k, &lam) in e.lambda.iter().enumerate() {
        if lam <= cutoff {
            let c: f64 = e.u.column(k).iter().zip(y).map(|(u, v)| u * v).sum();
            outside += c * c;
        }
    }
    let dist = outside.sqrt();
    if dist > eta + 1e-8 * (1.0 + norm(y)) {
        return Err(LabError::Infeasible(format!(
            "y lies {dist:e} from the range of the operator (allowed {eta:e})"
        )));
    }
    Ok(())
}

/// Minimizer of `tr(Xᵀ W X)` subject to the constraint, with `W⁻¹` given
/// (`None` means the identity). Writing `H⁻¹ = I ⊗ W⁻¹` on column-major
/// vectors, `X = H⁻¹ Aᵀ z` with `(A H⁻¹ Aᵀ + μI) z = y` and `μ = 0` when
/// `η = 0`. For `η > 0`, `μ` is bisected so that the residual `‖μ z‖` meets `η`.
fn weighted_step(
    op: &MeasurementOperator,
    gram: &DenseMatrix,
    w_inv: Option<&DenseMatrix>,
    y: &[f64],
    eta: f64,
    tol: f64,
) -> Result<DenseMatrix> {
    let (m, n) = op.input_shape();
    let a = op.matrix();
    let apply_h = |v: &[f64]| -> Vec<f64> {
        match w_inv {
            None => v.to_vec(),
            Some(w) => w.matmul(&DenseMatrix::from_col_major(m, n, v)).vec_col_major(),
        }
    };
    let g = match w_inv {
        None => gram.clone(),
        Some(_) => {
            let l = a.rows();
            let mut ah = DenseMatrix::zeros(l, m * n);
            for i in 0..l {
                for (j, v) in apply_h(a.row(i)).into_iter().enumerate() {
                    ah[(i, j)] = v;
                }
            }
            ah.matmul(&a.transpose()).symmetrize()
        }
    };
    let z = if eta == 0.0 {
        psd_solve(&g, y)?
    } else {
        penalized_solve(&g, y, eta, tol)?
    };
    Ok(DenseMatrix::from_col_major(m, n, &apply_h(&a.t_matvec(&z))))
}

/// Solves `(G + μI) z = y` with `μ` chosen by log-space bisection so that
/// `‖μ z‖₂` is at most `eta` and within `tol·(1 + eta)` of it.
fn penalized_solve(g: &DenseMatrix, y: &[f64], eta: f64, tol: f64) -> Result<Vec<f64>> {
    let l = g.rows();
    let solve = |mu: f64| -> Result<(Vec<f64>, f64)> {
        let shifted = g + &DenseMatrix::identity(l).scale(mu);
        let z = psd_solve(&shifted, y)?;
        let r = mu * norm(&z);
        Ok((z, r))
    };
    let base = g.trace().abs().max(f64::MIN_POSITIVE) / l as f64;
    let (mut lo, mut hi) = ((base * 1e-16).ln(), (base * 1e16).ln());
    let (mut best, r_lo) = solve(lo.exp())?;
    if r_lo >= eta {
        return Ok(best);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (z, r) = solve(mid.exp())?;
        if r <= eta {
            lo = mid;
            best = z;
            if eta - r <= tol * (1.0 + eta) {
                break;
            }
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
