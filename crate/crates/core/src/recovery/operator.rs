use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::linalg::{read_matrix, svd, write_matrix, DenseMatrix};
use crate::rng::SeededRng;

/// Linear map `ℝ^{m×n} → ℝ^l` stored as an `l × mn` matrix acting on
/// column-major `vec(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOperator {
    matrix: DenseMatrix,
    m: usize,
    n: usize,
}

impl MeasurementOperator {
    pub fn from_matrix(matrix: DenseMatrix, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 || matrix.cols() != m * n {
            return invalid(format!(
                "operator matrix has {} columns, expected m·n = {m}·{n}",
                matrix.cols()
            ));
        }
        Ok(Self { matrix, m, n })
    }

    /// Measures the listed `(row, col)` entries of `X`, one per output.
    pub fn entry_sampler(m: usize, n: usize, entries: &[(usize, usize)]) -> Result<Self> {
        if entries.is_empty() {
            return invalid("entry sampler needs at least one entry");
        }
        let mut matrix = DenseMatrix::zeros(entries.len(), m * n);
        for (row, &(i, j)) in entries.iter().enumerate() {
            if i >= m || j >= n {
                return invalid(format!("entry ({i}, {j}) outside {m}x{n}"));
            }
            matrix[(row, j * m + i)] = 1.0;
        }
        Self::from_matrix(matrix, m, n)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// `(m, n)` of the input matrices.
    pub fn input_shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Number of measurements `l`.
    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `𝒜(X)`; panics if `X` has the wrong shape.
    pub fn apply(&self, x: &DenseMatrix) -> Vec<f64> {
        assert_eq!(x.shape(), (self.m, self.n), "operator input shape");
        self.matrix.matvec(&x.vec_col_major())
    }

    /// `𝒜*(y)`.
    pub fn adjoint(&self, y: &[f64]) -> DenseMatrix {
        DenseMatrix::from_col_major(self.m, self.n, &self.matrix.t_matvec(y))
    }
}

/// iid `N(0, 1/l)` entries, deterministic per seed.
pub fn gaussian_operator(m: usize, n: usize, l: usize, seed: u64) -> Result<MeasurementOperator> {
    if l == 0 || m == 0 || n == 0 {
        return invalid("operator dimensions must be positive");
    }
    let g = SeededRng::new(seed).gaussian_matrix(l, m * n);
    MeasurementOperator::from_matrix(g.scale(1.0 / (l as f64).sqrt()), m, n)
}

/// `A_{U,V}` (`l × m`): column `j` is `𝒜(u_j v_jᵀ)`, so
/// `A_{U,V}·x = 𝒜(U [Diag(x) 0] Vᵀ)`. Requires `m ≤ n`.
pub fn induced_matrix(op: &MeasurementOperator, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = op.input_shape();
    if m > n {
        return invalid(format!("induced matrix needs m ≤ n, got {m}x{n}"));
    }
    if u.shape() != (m, m) || !u.is_orthogonal(1e-8 * m as f64) {
        return invalid("U must be an m×m orthogonal matrix");
    }
    if v.shape() != (n, n) || !v.is_orthogonal(1e-8 * n as f64) {
        return invalid("V must be an n×n orthogonal matrix");
    }
    let mut out = DenseMatrix::zeros(op.len(), m);
    for j in 0..m {
        let uj = u.column(j);
        let vj = v.column(j);
        let mut rank_one = DenseMatrix::zeros(m, n);
        for (r, &a) in uj.iter().enumerate() {
            for (c, &b) in vj.iter().enumerate() {
                rank_one[(r, c)] = a * b;
            }
        }
        out.set_column(j, &op.apply(&rank_one));
    }
    Ok(out)
}

/// Orthonormal basis of `{Z : 𝒜(Z) = 0}`, reshaped to `m × n` matrices.
pub fn nullspace_basis(op: &MeasurementOperator) -> Result<Vec<DenseMatrix>> {
    let (m, n) = op.input_shape();
    let f = svd(op.matrix())?;
    let rank = f.rank();
    Ok((rank..m * n)
        .map(|j| DenseMatrix::from_col_major(m, n, &f.v.column(j)))
        .collect())
}

/// A recovery problem `min ‖X‖_p^p s.t. ‖𝒜(X) − y‖₂ ≤ η`.
#[derive(Clone, Debug)]
pub struct RecoveryInstance {
    pub operator: MeasurementOperator,
    pub y: Vec<f64>,
    pub eta: f64,
    pub p: f64,
    pub ground_truth: Option<DenseMatrix>,
    pub seed: u64,
}

impl RecoveryInstance {
    pub fn new(operator: MeasurementOperator, y: Vec<f64>, eta: f64, p: f64) -> Result<Self> {
        if y.len() != operator.len() {
            return invalid(format!(
                "y has length {}, operator has {} rows",
                y.len(),
                operator.len()
            ));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return invalid("y must be finite");
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return invalid(format!("eta must be nonnegative, got {eta}"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return invalid(format!("p must lie in (0, 1], got {p}"));
        }
        Ok(Self {
            operator,
            y,
            eta,
            p,
            ground_truth: None,
            seed: 0,
        })
    }

    /// Noiseless instance `y = 𝒜(X̄)` with known ground truth.
    pub fn from_ground_truth(operator: MeasurementOperator, truth: DenseMatrix, p: f64) -> Result<Self> {
        if truth.shape() != operator.input_shape() {
            return invalid("ground truth shape does not match operator");
        }
        let y = operator.apply(&truth);
        let mut inst = Self::new(operator, y, 0.0, p)?;
        inst.ground_truth = Some(truth);
        Ok(inst)
    }

    /// Seeded Gaussian operator and unit-Frobenius rank-`k` ground truth.
    pub fn gaussian(m: usize, n: usize, k: usize, l: usize, p: f64, seed: u64) -> Result<Self> {
        let operator = gaussian_operator(m, n, l, seed)?;
        let mut rng = SeededRng::new(seed ^ TRUTH_STREAM);
        let truth = low_rank_truth(m, n, k, &mut rng)?;
        let mut inst = Self::from_ground_truth(operator, truth, p)?;
        inst.seed = seed;
        Ok(inst)
    }

    /// Writes `instance.json`, `operator.txt`, `y.txt` and, if present,
    /// `ground_truth.txt` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let (m, n) = self.operator.input_shape();
        let header = InstanceHeader {
            m,
            n,
            l: self.operator.len(),
            p: self.p,
            eta: self.eta,
            seed: self.seed,
        };
        fs::write(dir.join("instance.json"), serde_json::to_string_pretty(&header)? + "\n")?;
        write_matrix(dir.join("operator.txt"), self.operator.matrix())?;
        write_matrix(dir.join("y.txt"), &DenseMatrix::new(self.y.len(), 1, self.y.clone())?)?;
        if let Some(t) = &self.ground_truth {
            write_matrix(dir.join("ground_truth.txt"), t)?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let header: InstanceHeader = serde_json::from_str(&fs::read_to_string(dir.join("instance.json"))?)?;
        let operator = MeasurementOperator::from_matrix(read_matrix(dir.join("operator.txt"))?, header.m, header.n)?;
        if operator.len() != header.l {
            return Err(LabError::Parse(format!(
                "operator has {} rows but header says l = {}",
                operator.len(),
                header.l
            )));
        }
        let y = read_matrix(dir.join("y.txt"))?.into_vec();
        let mut inst = Self::new(operator, y, header.eta, header.p)?;
        inst.seed = header.seed;
        let truth_path = dir.join("ground_truth.txt");
        if truth_path.exists() {
            inst.ground_truth = Some(read_matrix(truth_path)?);
        }
        Ok(inst)
    }
}

/// JSON header of a saved instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub p: f64,
    pub eta: f64,
    pub seed: u64,
}

/// Stream offset separating ground-truth draws from operator draws.
const TRUTH_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Product of `m×k` and `k×n` Gaussian factors scaled to unit Frobenius norm.
pub fn low_rank_truth(m: usize, n: usize, k: usize, rng: &mut SeededRng) -> Result<DenseMatrix> {
    if k == 0 || k > m.min(n) {
        return invalid(format!("rank {k} out of range for {m}x{n}"));
    }
    let x = rng.gaussian_matrix(m, k).matmul(&rng.gaussian_matrix(k, n));
    Ok(x.scale(1.0 / x.frobenius_norm()))
}
