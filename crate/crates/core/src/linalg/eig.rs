//! Classical cyclic two-sided Jacobi for symmetric matrices.
//!
//! The input is symmetrized as `(M + Mᵀ)/2`. Sweeps stop once the off-diagonal
//! Frobenius mass is at most `OFF_TOL·‖M‖_F`, or after `MAX_SWEEPS` sweeps.

use super::matrix::DenseMatrix;
use crate::error::{invalid, Result};

pub const OFF_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 30;

/// `M = U · Diag(λ) · Uᵀ` with `λ` descending.
#[derive(Clone, Debug)]
pub struct SymEigFactorization {
    pub u: DenseMatrix,
    pub lambda: Vec<f64>,
}

impl SymEigFactorization {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u
            .matmul(&DenseMatrix::diag(&self.lambda))
            .matmul(&self.u.transpose())
    }

    /// `U · Diag(g(λ)) · Uᵀ`.
    pub fn apply_fn(&self, g: impl Fn(f64) -> f64) -> DenseMatrix {
        let vals: Vec<f64> = self.lambda.iter().map(|&l| g(l)).collect();
        self.u.matmul(&DenseMatrix::diag(&vals)).matmul(&self.u.transpose())
    }
}

pub fn sym_eig(m: &DenseMatrix) -> Result<SymEigFactorization> {
    if !m.is_square() {
        return invalid(format!("sym_eig needs a square matrix, got {:?}", m.shape()));
    }
    if !m.is_finite() {
        return invalid("sym_eig input contains non-finite entries");
    }
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut u = DenseMatrix::identity(n);
    let norm = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= OFF_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    // |app − aqq| dwarfs apq beyond double precision.
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                apply_rotation(&mut a, &mut u, p, q, c, s, t);
            }
        }
    }

    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let lambda = order.iter().map(|&i| diag[i]).collect();
    let mut sorted_u = DenseMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        sorted_u.set_column(k, &u.column(i));
    }
    Ok(SymEigFactorization { u: sorted_u, lambda })
}

/// Applies `J(p, q, θ)ᵀ · A · J` and accumulates `U ← U · J`.
fn apply_rotation(a: &mut DenseMatrix, u: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_p = c * arp - s * arq;
        let new_q = s * arp + c * arq;
        a[(r, p)] = new_p;
        a[(p, r)] = new_p;
        a[(r, q)] = new_q;
        a[(q, r)] = new_q;
    }
    for r in 0..n {
        let urp = u[(r, p)];
        let urq = u[(r, q)];
        u[(r, p)] = c * urp - s * urq;
        u[(r, q)] = s * urp + c * urq;
    }
}
