//! Python module `immunolearn`: parameter classes, closed forms,
//! simulation, steady-state sampling and Monte Carlo estimates.

use immunolearn_core::analytics::{self, CountMethod};
use immunolearn_core::engine::{self, SimulationConfig, StopCondition};
use immunolearn_core::{oracle, sampler, stats, ColumnState, MatrixState};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: immunolearn_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Rates of the single-column chain.
#[pyclass(name = "SingleColumnParams", frozen)]
struct PySingleColumnParams(immunolearn_core::SingleColumnParams);

#[pymethods]
impl PySingleColumnParams {
    #[new]
    #[pyo3(signature = (m, alpha, p))]
    fn new(m: usize, alpha: f64, p: f64) -> PyResult<Self> {
        immunolearn_core::SingleColumnParams::new(m, alpha, p).map(Self).map_err(err)
    }

    /// Parameters with shape `a = pM/(αq)` fixed instead of `p`.
    #[staticmethod]
    fn with_shape(m: usize, alpha: f64, a: f64) -> PyResult<Self> {
        immunolearn_core::SingleColumnParams::with_shape(m, alpha, a).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }
    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }
    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }
    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    fn __repr__(&self) -> String {
        format!("SingleColumnParams(m={}, alpha={}, p={})", self.0.m(), self.0.alpha(), self.0.p())
    }
}

/// Rates of the M×N matrix chain.
#[pyclass(name = "MatrixParams", frozen)]
struct PyMatrixParams(immunolearn_core::MatrixParams);

#[pymethods]
impl PyMatrixParams {
    #[new]
    #[pyo3(signature = (m, n, p, lambda_m = 0.0))]
    fn new(m: usize, n: usize, p: f64, lambda_m: f64) -> PyResult<Self> {
        immunolearn_core::MatrixParams::new(m, n, p, lambda_m).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }
    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }
    #[getter]
    fn lambda_m(&self) -> f64 {
        self.0.lambda_m()
    }
    #[getter]
    fn q_tilde(&self) -> f64 {
        self.0.q_tilde()
    }
    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }
    #[getter]
    fn b_tilde(&self) -> f64 {
        self.0.b_tilde()
    }

    fn __repr__(&self) -> String {
        format!("MatrixParams(m={}, n={}, p={}, lambda_m={})", self.0.m(), self.0.n(), self.0.p(), self.0.lambda_m())
    }
}

/// Maps discrete-model `(p_d, N, p_m, M)` to `(SingleColumnParams, MatrixParams)`.
#[pyfunction]
fn identify_parameters(p_d: f64, n: usize, p_m: f64, m: usize) -> PyResult<(PySingleColumnParams, PyMatrixParams)> {
    let (s, mp) = analytics::identify_parameters(p_d, n, p_m, m).map_err(err)?;
    Ok((PySingleColumnParams(s), PyMatrixParams(mp)))
}

#[pyfunction]
fn invariant_pmf(params: &PySingleColumnParams) -> Vec<f64> {
    analytics::invariant_pmf(&params.0)
}

/// Invariant law from the dense linear-algebra solve (small M only).
#[pyfunction]
fn oracle_invariant_pmf(params: &PySingleColumnParams) -> PyResult<Vec<f64>> {
    let gen = oracle::DenseGenerator::single_column(&params.0).map_err(err)?;
    oracle::stationary_solve(&gen).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, start = 0))]
fn hitting_time_mean_exact(params: &PySingleColumnParams, start: usize) -> PyResult<f64> {
    analytics::hitting_time_mean_exact(&params.0, ColumnState(start)).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn hitting_time_mean_asymptotic(params: &PySingleColumnParams) -> f64 {
    analytics::hitting_time_mean_asymptotic(&params.0).value
}

#[pyfunction]
#[pyo3(signature = (params, start = 0))]
fn hitting_time_variance_exact(params: &PySingleColumnParams, start: usize) -> PyResult<f64> {
    analytics::hitting_time_variance_exact(&params.0, ColumnState(start)).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn zero_count_ratio(params: &PySingleColumnParams, k: usize) -> PyResult<f64> {
    analytics::zero_count_ratio(&params.0, k).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn coupon_done_by_draws(n: usize, k: usize) -> PyResult<f64> {
    analytics::coupon_done_by_draws(n, k).map_err(err)
}

#[pyfunction]
fn collection_time_laplace(m: usize, q: f64, alpha: f64) -> PyResult<f64> {
    analytics::collection_time_laplace(m, q, alpha).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn steady_allones_probability(params: &PyMatrixParams) -> f64 {
    analytics::steady_allones_probability(&params.0).value
}

/// `method` is one of `"exact"`, `"asymptotic"`, `"asymptotic_rescaled"`.
#[pyfunction]
#[pyo3(signature = (params, method = "exact"))]
fn steady_allones_count(params: &PyMatrixParams, method: &str) -> PyResult<f64> {
    let method = match method {
        "exact" => CountMethod::Exact,
        "asymptotic" => CountMethod::Asymptotic,
        "asymptotic_rescaled" => CountMethod::AsymptoticRescaled,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(analytics::steady_allones_count(&params.0, method).value)
}

#[pyfunction]
fn transition_time_prediction(params: &PyMatrixParams) -> f64 {
    analytics::transition_time_prediction(&params.0).value
}

#[pyfunction]
fn transient_allones_probability(params: &PyMatrixParams, t: f64) -> PyResult<f64> {
    analytics::transient_allones_probability(&params.0, t).map(|r| r.value).map_err(err)
}

/// Independent first-hit times from the zero state, replicate `r` on stream
/// `(seed, r)`.
#[pyfunction]
#[pyo3(signature = (params, n, seed = 0))]
fn hitting_times(py: Python<'_>, params: &Bound<'_, PyAny>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    if let Ok(p) = params.cast::<PySingleColumnParams>() {
        let p = p.get().0;
        py.detach(|| engine::hitting_time_batch(&p, n, seed)).map_err(err)
    } else if let Ok(p) = params.cast::<PyMatrixParams>() {
        let p = p.get().0;
        py.detach(|| engine::hitting_time_batch(&p, n, seed)).map_err(err)
    } else {
        Err(PyValueError::new_err("expected SingleColumnParams or MatrixParams"))
    }
}

// `Vec<u8>` would surface as `bytes`; rows are plain int lists in Python
fn matrix_rows(state: &MatrixState) -> Vec<Vec<u32>> {
    state.to_rows().into_iter().map(|r| r.into_iter().map(u32::from).collect()).collect()
}

/// One matrix trajectory from the all-zero state. Returns a dict with the
/// all-ones column count series, first hit, end time and final matrix.
#[pyfunction]
#[pyo3(signature = (params, horizon = None, seed = 0, replicate = 0))]
fn simulate_matrix<'py>(
    py: Python<'py>,
    params: &PyMatrixParams,
    horizon: Option<f64>,
    seed: u64,
    replicate: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.0;
    let cfg = match horizon {
        Some(h) => SimulationConfig::until_time(seed, replicate, h),
        None => SimulationConfig::until_hit(seed, replicate),
    }
    .with_series();
    let tr = py.detach(|| engine::simulate_matrix(&p, &cfg, MatrixState::for_params(&p))).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("series", tr.series)?;
    d.set_item("first_hit", tr.first_hit)?;
    d.set_item("end_time", tr.end_time)?;
    d.set_item("n_events", tr.n_events)?;
    d.set_item("full_columns", tr.final_state.full_columns())?;
    d.set_item("matrix", matrix_rows(&tr.final_state))?;
    Ok(d)
}

/// One single-column trajectory from 0, until `M` is reached or until
/// `horizon`. Returns a dict with the one-count series and occupation times.
#[pyfunction]
#[pyo3(signature = (params, horizon = None, seed = 0, replicate = 0))]
fn simulate_single_column<'py>(
    py: Python<'py>,
    params: &PySingleColumnParams,
    horizon: Option<f64>,
    seed: u64,
    replicate: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.0;
    let mut cfg = match horizon {
        Some(h) => SimulationConfig::until_time(seed, replicate, h),
        None => SimulationConfig::until_hit(seed, replicate),
    };
    if horizon.is_none() {
        cfg.stop = StopCondition::ColumnReachesM;
    }
    let cfg = cfg.with_series();
    let tr = py.detach(|| engine::simulate_single_column(&p, &cfg, ColumnState(0))).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("series", tr.series)?;
    d.set_item("first_hit", tr.first_hit)?;
    d.set_item("end_time", tr.end_time)?;
    d.set_item("n_events", tr.n_events)?;
    d.set_item("occupation", tr.occupation)?;
    Ok(d)
}

/// `n` exact draws from the matrix chain's invariant law, each as a list of
/// 0/1 rows.
#[pyfunction]
#[pyo3(signature = (params, n, seed = 0))]
fn sample_steady(py: Python<'_>, params: &PyMatrixParams, n: usize, seed: u64) -> PyResult<Vec<Vec<Vec<u32>>>> {
    let p = params.0;
    let draws = py.detach(|| sampler::sample_invariant_batch(&p, n, seed)).map_err(err)?;
    Ok(draws.iter().map(matrix_rows).collect())
}

/// Counts per matrix state (bit `i·N + j` for entry `(i, j)`) over `n` draws.
#[pyfunction]
#[pyo3(signature = (params, n, seed = 0))]
fn steady_state_histogram(py: Python<'_>, params: &PyMatrixParams, n: u64, seed: u64) -> PyResult<Vec<u64>> {
    let p = params.0;
    py.detach(|| sampler::steady_state_histogram(&p, n, seed)).map_err(err)
}

/// Mean with a normal confidence interval, as a dict.
#[pyfunction]
#[pyo3(signature = (samples, level = 0.95, seed = 0))]
fn estimate_mean<'py>(py: Python<'py>, samples: Vec<f64>, level: f64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let e = stats::estimate_mean(&samples, level, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("point", e.point)?;
    d.set_item("half_width", e.half_width)?;
    d.set_item("std_error", e.std_error)?;
    d.set_item("level", e.level)?;
    d.set_item("n", e.n)?;
    d.set_item("master_seed", e.master_seed)?;
    Ok(d)
}

#[pymodule]
fn immunolearn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySingleColumnParams>()?;
    m.add_class::<PyMatrixParams>()?;
    m.add_function(wrap_pyfunction!(identify_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_invariant_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time_mean_exact, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time_mean_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time_variance_exact, m)?)?;
    m.add_function(wrap_pyfunction!(zero_count_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(coupon_done_by_draws, m)?)?;
    m.add_function(wrap_pyfunction!(collection_time_laplace, m)?)?;
    m.add_function(wrap_pyfunction!(steady_allones_probability, m)?)?;
    m.add_function(wrap_pyfunction!(steady_allones_count, m)?)?;
    m.add_function(wrap_pyfunction!(transition_time_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(transient_allones_probability, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_times, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_single_column, m)?)?;
    m.add_function(wrap_pyfunction!(sample_steady, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean, m)?)?;
    Ok(())
}
