//! Numerical toolkit for the concave singular-value perturbation inequality
//!
//! ```text
//! Σ |f(σᵢ(A)) − f(σᵢ(B))| ≤ Σ f(σᵢ(A − B))
//! ```
//!
//! for concave `f: ℝ₊ → ℝ₊` with `f(0) = 0`, together with the machinery used
//! to establish it (Hermitian dilation, spectrum-sorting derivative matrices,
//! commutator descent over the orthogonal group) and its low-rank recovery
//! applications (Schatten-p IRLS, nullspace condition sampling, failure
//! witnesses, RIP estimation).
//!
//! Modules:
//! - [`linalg`]: dense matrices, Jacobi SVD and symmetric eigensolver, dilation.
//! - [`gauge`]: concave gauges, Schatten quasi-norms, `M_π` construction.
//! - [`verify`]: inequality checks, seeded ensembles and fuzz campaigns.
//! - [`align`]: commutator descent on `Q ↦ Σ f(σ(Σ_A − QΣ_BQᵀ))`.
//! - [`recovery`]: measurement operators, IRLS, nullspace and RIP tools.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod recovery;
pub mod rng;
pub mod verify;

pub use error::{LabError, Result};
pub use gauge::ConcaveGauge;
pub use linalg::{DenseMatrix, SvdFactorization, SymEigFactorization};

/// Header line written at the top of every CSV table and JSON-lines trace.
pub const SCHEMA_HEADER: &str = "# schatten-lab v1";
