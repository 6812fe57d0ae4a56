//! Householder QR, Cholesky, the matrix exponential and the Hermitian dilation.

use super::eig::sym_eig;
use super::matrix::DenseMatrix;
use crate::error::{invalid, Result};

/// Dilation `Ξ(Z) = [[0, Z], [Zᵀ, 0]]`, an `(m+n) × (m+n)` symmetric matrix
/// whose eigenvalues are `±σᵢ(Z)` plus `|m − n|` zeros.
pub fn dilation(z: &DenseMatrix) -> DenseMatrix {
    let (m, n) = z.shape();
    let mut out = DenseMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            out[(i, m + j)] = z[(i, j)];
            out[(m + j, i)] = z[(i, j)];
        }
    }
    out
}

/// Thin QR of a square or tall matrix via Householder reflections.
///
/// The returned `Q` (rows × cols) has orthonormal columns and `R` has a
/// nonnegative diagonal, which makes `Q` of a Gaussian matrix Haar-distributed.
pub fn qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "qr expects rows >= cols");
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        for j in k..n {
            let proj: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * v[i - k] * proj;
            }
        }
        reflectors.push(v);
    }
    // Accumulate Q = H₁ ⋯ Hₙ applied to the first n columns of I.
    let mut q = DenseMatrix::rect_diag(m, n, &vec![1.0; n]);
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let proj: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..m {
                q[(i, j)] -= 2.0 * v[i - k] * proj;
            }
        }
    }
    // Flip signs so diag(R) ≥ 0.
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in 0..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    let mut r_square = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r_square[(i, j)] = r[(i, j)];
        }
    }
    (q, r_square)
}

/// Nearest-in-spirit orthogonal factor: the `Q` of a QR factorization.
pub fn reorthonormalize(q: &DenseMatrix) -> DenseMatrix {
    qr(q).0
}

/// Lower-triangular `L` with `A = L Lᵀ`, or `None` if `A` is not numerically
/// positive definite.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b`.
pub fn cholesky_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solves the symmetric positive semidefinite system `A x = b`, falling back
/// to the eigen-decomposition pseudo-inverse when Cholesky breaks down.
pub fn psd_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if let Some(l) = cholesky(a) {
        let x = cholesky_solve(&l, b);
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    Ok(pinv_sym(a)?.matvec(b))
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix.
pub fn pinv_sym(a: &DenseMatrix) -> Result<DenseMatrix> {
    let e = sym_eig(a)?;
    let top = e.lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cutoff = a.rows() as f64 * f64::EPSILON * top;
    Ok(e.apply_fn(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 }))
}

/// Matrix exponential by scaling and squaring of a degree-18 Taylor polynomial.
///
/// Accurate to roughly machine precision for the moderate norms met in
/// orthogonal-group line searches; for skew-symmetric input the result is
/// orthogonal to the same precision.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return invalid("expm needs a square matrix");
    }
    if !a.is_finite() {
        return invalid("expm input contains non-finite entries");
    }
    let n = a.rows();
    let norm = a.frobenius_norm();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale(1.0 / 2f64.powi(squarings as i32));
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=18 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn qr_reconstructs_with_positive_diagonal() {
        let mut rng = SeededRng::new(1);
        for &(m, n) in &[(4, 4), (6, 3), (1, 1)] {
            let a = rng.gaussian_matrix(m, n);
            let (q, r) = qr(&a);
            assert!((&q.matmul(&r) - &a).frobenius_norm() < 1e-12 * (1.0 + a.frobenius_norm()));
            assert!((&q.t_matmul(&q) - &DenseMatrix::identity(n)).frobenius_norm() < 1e-12);
            assert!((0..n).all(|k| r[(k, k)] >= 0.0));
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let g = SeededRng::new(2).gaussian_matrix(5, 5);
        let a = &g.t_matmul(&g) + &DenseMatrix::identity(5);
        let b = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let x = psd_solve(&a, &b).unwrap();
        let ax = a.matvec(&x);
        assert!(ax.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-10));
        assert!(cholesky(&DenseMatrix::diag(&[1.0, -1.0])).is_none());
    }

    #[test]
    fn pseudo_inverse_of_singular() {
        let a = DenseMatrix::diag(&[2.0, 0.0]);
        let p = pinv_sym(&a).unwrap();
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15 && p[(1, 1)] == 0.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let theta = 0.7;
        let d = DenseMatrix::from_rows(&[[0.0, -theta], [theta, 0.0]]).unwrap();
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - theta.sin()).abs() < 1e-14);
        let big = d.scale(40.0);
        assert!(expm(&big).unwrap().is_orthogonal(1e-10));
    }

    #[test]
    fn dilation_layout() {
        let z = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let x = dilation(&z);
        assert_eq!(x.shape(), (4, 4));
        assert!(x.is_symmetric(0.0));
        assert_eq!(x[(0, 3)], 3.0);
        assert_eq!(x[(3, 0)], 3.0);
        assert_eq!(x[(1, 2)], 0.0);
    }
}
