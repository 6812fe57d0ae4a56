//! Self-contained dense linear algebra.

mod decomp;
mod eig;
mod io;
mod matrix;
mod svd;

pub use decomp::{cholesky, cholesky_solve, dilation, expm, pinv_sym, psd_solve, qr, reorthonormalize};
pub use eig::{sym_eig, SymEigFactorization};
pub use io::{parse_matrix, read_matrix, write_matrix};
pub use matrix::DenseMatrix;
pub use svd::{singular_values, svd, SvdFactorization};

/// Spectral norm `σ₁(M)`.
pub fn spectral_norm(m: &DenseMatrix) -> crate::Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}
