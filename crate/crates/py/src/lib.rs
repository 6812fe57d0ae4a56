//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use schatten_core::align::{align_from, verify_commutation, AlignConfig, AlignmentState};
use schatten_core::gauge::{self, ConcaveGauge};
use schatten_core::linalg::{self, DenseMatrix};
use schatten_core::recovery::{self, IrlsConfig, MeasurementOperator, PhaseConfig, RecoveryInstance};
use schatten_core::verify::{self as core_verify, CampaignConfig, CheckKind, Ensemble, VerificationReport};
use schatten_core::LabError;

type Rows = Vec<Vec<f64>>;

/// `(p, l, success_rate, mean_err, trials)`.
type PhaseRowTuple = (f64, usize, f64, f64, usize);

fn py_err(e: LabError) -> PyErr {
    match e {
        LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Rows) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(py_err)
}

fn to_rows(m: &DenseMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// A concave gauge parsed from a spec such as `"capped:power:0.5:delta=0.01"`.
#[pyclass(name = "Gauge", frozen, from_py_object)]
#[derive(Clone)]
struct PyGauge {
    inner: ConcaveGauge,
}

#[pymethods]
impl PyGauge {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spec.parse().map_err(py_err)?,
        })
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(py_err)
    }

    fn right_derivative(&self, x: f64) -> PyResult<f64> {
        gauge::gauge_right_derivative(&self.inner, x).map_err(py_err)
    }

    #[getter]
    fn well_behaved(&self) -> bool {
        self.inner.is_well_behaved()
    }

    fn __repr__(&self) -> String {
        format!("Gauge('{}')", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

#[pyclass(name = "Report", frozen, get_all)]
struct PyReport {
    check_name: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
    holds: bool,
    tolerance: f64,
    input_seed: u64,
    dims: (usize, usize),
    gauge_spec: String,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(check_name='{}', lhs={}, rhs={}, holds={})",
            self.check_name,
            self.lhs,
            self.rhs,
            if self.holds { "True" } else { "False" }
        )
    }
}

impl From<VerificationReport> for PyReport {
    fn from(r: VerificationReport) -> Self {
        Self {
            check_name: r.check_name,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            holds: r.holds,
            tolerance: r.tolerance,
            input_seed: r.input_seed,
            dims: r.dims,
            gauge_spec: r.gauge_spec,
        }
    }
}

#[pyclass(name = "AlignResult", frozen)]
struct PyAlignResult {
    state: AlignmentState,
}

#[pymethods]
impl PyAlignResult {
    #[getter]
    fn q(&self) -> Rows {
        to_rows(&self.state.q)
    }

    #[getter]
    fn bbar(&self) -> Rows {
        to_rows(&self.state.bbar())
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.state.objective
    }

    #[getter]
    fn commutator_norm(&self) -> f64 {
        self.state.commutator_norm
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.state.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.state.converged
    }

    /// `(iter, objective, commutator_norm, step)` per accepted step.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64, f64, f64)> {
        self.state
            .trace
            .iter()
            .map(|s| (s.iter, s.objective, s.commutator_norm, s.step))
            .collect()
    }

    fn commutes(&self, tol: f64) -> bool {
        verify_commutation(&self.state, tol)
    }
}

#[pyfunction]
fn singular_values(m: Rows) -> PyResult<Vec<f64>> {
    linalg::singular_values(&to_matrix(m)?).map_err(py_err)
}

/// Full SVD as `(U, sigma, V)` with `M = U [Σ 0] Vᵀ`.
#[pyfunction]
fn svd(m: Rows) -> PyResult<(Rows, Vec<f64>, Rows)> {
    let f = linalg::svd(&to_matrix(m)?).map_err(py_err)?;
    Ok((to_rows(&f.u), f.sigma, to_rows(&f.v)))
}

/// Symmetric eigendecomposition as `(lambda, U)`, `lambda` descending.
#[pyfunction]
fn sym_eig(m: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let f = linalg::sym_eig(&to_matrix(m)?).map_err(py_err)?;
    Ok((f.lambda, to_rows(&f.u)))
}

#[pyfunction]
fn dilation(z: Rows) -> PyResult<Rows> {
    Ok(to_rows(&linalg::dilation(&to_matrix(z)?)))
}

#[pyfunction]
fn schatten_quasi_norm(x: Rows, p: f64) -> PyResult<f64> {
    gauge::schatten_quasi_norm(&to_matrix(x)?, p).map_err(py_err)
}

/// `Σ f(σᵢ(X))`.
#[pyfunction]
fn gauge_sum(x: Rows, f: &PyGauge) -> PyResult<f64> {
    gauge::gauge_sum(&to_matrix(x)?, &f.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, f, tol = 1e-9))]
fn check_main_inequality(a: Rows, b: Rows, f: &PyGauge, tol: f64) -> PyResult<PyReport> {
    core_verify::check_main_inequality(&to_matrix(a)?, &to_matrix(b)?, &f.inner, tol)
        .map(PyReport::from)
        .map_err(py_err)
}

/// Runs a named check (as printed in reproduction commands) on one pair.
#[pyfunction]
#[pyo3(signature = (a, b, name, f = None, tol = 1e-9))]
fn run_check(a: Rows, b: Rows, name: &str, f: Option<&PyGauge>, tol: f64) -> PyResult<Vec<PyReport>> {
    let reports =
        core_verify::run_named_check(&to_matrix(a)?, &to_matrix(b)?, f.map(|g| &g.inner), name, tol).map_err(py_err)?;
    Ok(reports.into_iter().map(PyReport::from).collect())
}

/// Seeded campaign; returns `(check, passed, failed, min_slack)` per check family.
#[pyfunction]
#[pyo3(signature = (ensemble, m, n, gauges, trials, seed = 0, checks = vec!["main".to_string()], tol = 1e-9, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn fuzz_campaign(
    py: Python<'_>,
    ensemble: &str,
    m: usize,
    n: usize,
    gauges: Vec<PyGauge>,
    trials: u64,
    seed: u64,
    checks: Vec<String>,
    tol: f64,
    jobs: usize,
) -> PyResult<Vec<(String, u64, u64, f64)>> {
    let ensemble = Ensemble::new(ensemble.parse().map_err(py_err)?, m, n, seed).map_err(py_err)?;
    let config = CampaignConfig {
        trials,
        tolerance: tol,
        checks: checks
            .iter()
            .map(|c| c.parse::<CheckKind>())
            .collect::<Result<_, _>>()
            .map_err(py_err)?,
        failure_dir: None,
        jobs,
        random_pwl: 0,
    };
    let gauges: Vec<ConcaveGauge> = gauges.into_iter().map(|g| g.inner).collect();
    let result = py
        .detach(|| core_verify::fuzz_campaign_with(&ensemble, &gauges, &config))
        .map_err(py_err)?;
    Ok(result
        .summary
        .into_iter()
        .map(|s| (s.check, s.passed, s.failed, s.min_slack))
        .collect())
}

/// Commutator descent from `q0` (identity when omitted).
#[pyfunction]
#[pyo3(signature = (sigma_a, sigma_b, f, q0 = None, max_iters = 5000, tol = 1e-6))]
fn align(
    sigma_a: Vec<f64>,
    sigma_b: Vec<f64>,
    f: &PyGauge,
    q0: Option<Rows>,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyAlignResult> {
    let q0 = match q0 {
        Some(q) => to_matrix(q)?,
        None => DenseMatrix::identity(sigma_a.len()),
    };
    let config = AlignConfig {
        max_iters,
        tol_commutator: tol,
        ..AlignConfig::default()
    };
    let state = align_from(&sigma_a, &sigma_b, &f.inner, &q0, &config).map_err(py_err)?;
    Ok(PyAlignResult { state })
}

/// Solves `min ‖X‖_p^p s.t. ‖𝒜(X) − y‖₂ ≤ eta` for the operator given by
/// its `l × mn` matrix acting on column-major `vec(X)`.
#[pyfunction]
#[pyo3(signature = (operator, m, n, y, p, eta = 0.0))]
fn irls_solve(operator: Rows, m: usize, n: usize, y: Vec<f64>, p: f64, eta: f64) -> PyResult<Rows> {
    let op = MeasurementOperator::from_matrix(to_matrix(operator)?, m, n).map_err(py_err)?;
    let inst = RecoveryInstance::new(op, y, eta, p).map_err(py_err)?;
    recovery::irls_solve(&inst, &IrlsConfig::default())
        .map(|x| to_rows(&x))
        .map_err(py_err)
}

/// Seeded Gaussian instance as `(operator, y, ground_truth)`.
#[pyfunction]
fn gaussian_instance(m: usize, n: usize, k: usize, l: usize, seed: u64) -> PyResult<(Rows, Vec<f64>, Rows)> {
    let inst = RecoveryInstance::gaussian(m, n, k, l, 1.0, seed).map_err(py_err)?;
    let truth = inst.ground_truth.as_ref().expect("seeded instance has a ground truth");
    Ok((to_rows(inst.operator.matrix()), inst.y.clone(), to_rows(truth)))
}

/// `Σ_{i>k} σᵢᵖ − Σ_{i≤k} σᵢᵖ`; the condition needs this positive.
#[pyfunction]
fn nullspace_margin(z: Rows, p: f64, k: usize) -> PyResult<f64> {
    recovery::nullspace_margin(&to_matrix(z)?, p, k).map_err(py_err)
}

/// `(X̄, X̄′)` built from a violating nullspace element.
#[pyfunction]
fn failure_witness(z: Rows, k: usize, p: f64) -> PyResult<(Rows, Rows)> {
    let w = recovery::failure_witness(&to_matrix(z)?, k, p).map_err(py_err)?;
    Ok((to_rows(&w.xbar), to_rows(&w.xbar_prime)))
}

#[pyfunction]
fn rip_estimate(operator: Rows, m: usize, n: usize, r: usize, trials: usize, seed: u64) -> PyResult<f64> {
    let op = MeasurementOperator::from_matrix(to_matrix(operator)?, m, n).map_err(py_err)?;
    recovery::rip_estimate(&op, r, trials, seed).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, n, k, p_list, l_list, trials, seed, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn phase_transition(
    py: Python<'_>,
    m: usize,
    n: usize,
    k: usize,
    p_list: Vec<f64>,
    l_list: Vec<usize>,
    trials: usize,
    seed: u64,
    jobs: usize,
) -> PyResult<Vec<PhaseRowTuple>> {
    let mut config = PhaseConfig::new(m, n, k, p_list, l_list, trials, seed);
    config.jobs = jobs;
    let rows = py.detach(|| recovery::phase_transition(&config)).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.p, r.l, r.success_rate, r.mean_err, r.trials))
        .collect())
}

#[pymodule]
fn schatten_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGauge>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyAlignResult>()?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(svd, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eig, m)?)?;
    m.add_function(wrap_pyfunction!(dilation, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_quasi_norm, m)?)?;
    m.add_function(wrap_pyfunction!(gauge_sum, m)?)?;
    m.add_function(wrap_pyfunction!(check_main_inequality, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_function(wrap_pyfunction!(irls_solve, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_instance, m)?)?;
    m.add_function(wrap_pyfunction!(nullspace_margin, m)?)?;
    m.add_function(wrap_pyfunction!(failure_witness, m)?)?;
    m.add_function(wrap_pyfunction!(rip_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(phase_transition, m)?)?;
    m.add("SCHEMA_HEADER", schatten_core::SCHEMA_HEADER)?;
    Ok(())
}
