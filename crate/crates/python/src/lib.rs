//! Python bindings: penalties, proximal operators, the recovery solvers,
//! problem generators and the gNSP check.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::erf_sparse::experiments::{gnsp_falsifier, GnspVerdict};
use ::erf_sparse::problems::{DctSpec, ProblemInstance, SuperResSpec};
use ::erf_sparse::regularizers::{self as reg, ERF_PROX_MAX_ITER, ERF_PROX_TOL};
use ::erf_sparse::rng::seeded_rng;
use ::erf_sparse::{DenseMatrix, Error, SolverConfig, SolverReport};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence(_) | Error::NotSpd { .. } | Error::RankDeficient => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Dense row-major matrix.
#[pyclass(name = "Matrix", module = "erf_sparse", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: DenseMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: DenseMatrix::from_rows(&rows).map_err(py_err)? })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self { inner: DenseMatrix::identity(n) }
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.rows()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        ::erf_sparse::linalg::matvec(&self.inner, &x).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{})", self.inner.rows(), self.inner.cols())
    }
}

/// Outcome of a solve.
#[pyclass(name = "SolveResult", module = "erf_sparse", frozen, get_all)]
struct PySolveResult {
    solution: Vec<f64>,
    objective_trace: Vec<f64>,
    outer_iters: usize,
    total_inner_iters: usize,
    converged: bool,
    wall_seconds: f64,
}

impl From<SolverReport> for PySolveResult {
    fn from(r: SolverReport) -> Self {
        Self {
            solution: r.solution,
            objective_trace: r.objective_trace,
            outer_iters: r.outer_iters,
            total_inner_iters: r.total_inner_iters,
            converged: r.converged,
            wall_seconds: r.wall_seconds,
        }
    }
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(converged={}, outer_iters={})", self.converged, self.outer_iters)
    }
}

/// Generated problem with its ground truth.
#[pyclass(name = "Problem", module = "erf_sparse", frozen, get_all)]
struct PyProblem {
    a: PyMatrix,
    b: Vec<f64>,
    x_true: Option<Vec<f64>>,
}

impl From<ProblemInstance> for PyProblem {
    fn from(p: ProblemInstance) -> Self {
        Self { a: PyMatrix { inner: p.a }, b: p.b, x_true: p.x_true }
    }
}

#[pyfunction]
fn erf_phi(x: f64, sigma: f64) -> f64 {
    reg::erf_phi(x, sigma)
}

#[pyfunction]
fn erf_weight(x: f64, sigma: f64) -> f64 {
    reg::erf_weight(x, sigma)
}

/// `argmin_x μ·Φσ(x) + ½(x − v)²`.
#[pyfunction]
fn erf_prox(v: f64, mu: f64, sigma: f64) -> PyResult<f64> {
    reg::erf_prox(v, mu, sigma, ERF_PROX_TOL, ERF_PROX_MAX_ITER).map_err(py_err)
}

#[pyfunction]
fn tl1_prox(v: f64, mu: f64, a: f64) -> PyResult<f64> {
    reg::tl1_prox(v, mu, a).map_err(py_err)
}

#[pyfunction]
fn soft_shrink(v: f64, mu: f64) -> f64 {
    reg::soft_shrink_scalar(v, mu)
}

/// Penalty value `J(x)` for a method label and its parameters.
#[pyfunction]
#[pyo3(signature = (x, method, params=None))]
fn penalty(x: Vec<f64>, method: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<f64> {
    let p = reg::Penalty::parse(method, &params.unwrap_or_default()).map_err(py_err)?;
    reg::penalty_eval(&x, &p).map_err(py_err)
}

/// Solves `min J(x) s.t. Ax = b` (`constrained=True`) or
/// `min λJ(x) + ½‖Ax − b‖²`.
#[pyfunction]
#[pyo3(signature = (a, b, method="erf", constrained=false, params=None, lam=None, max_outer=None, max_inner=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    a: &PyMatrix,
    b: Vec<f64>,
    method: &str,
    constrained: bool,
    params: Option<BTreeMap<String, f64>>,
    lam: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
) -> PyResult<PySolveResult> {
    let p = reg::Penalty::parse(method, &params.unwrap_or_default()).map_err(py_err)?;
    let mut cfg = SolverConfig::default();
    if let Some(l) = lam {
        cfg.lambda = l;
    }
    if let Some(k) = max_outer {
        cfg.max_outer = k;
    }
    if let Some(k) = max_inner {
        cfg.max_inner = k;
    }
    let a = &a.inner;
    let report = py.detach(|| {
        if constrained {
            ::erf_sparse::solve_constrained(a, &b, &p, &cfg)
        } else {
            ::erf_sparse::solve_unconstrained(a, &b, &p, &cfg)
        }
    });
    Ok(report.map_err(py_err)?.into())
}

/// Over-sampled DCT instance with an `s`-sparse truth.
#[pyfunction]
#[pyo3(signature = (m, n, f, s, seed=0))]
fn dct_problem(m: usize, n: usize, f: f64, s: usize, seed: u64) -> PyResult<PyProblem> {
    ProblemInstance::dct(&DctSpec { m, n, f }, s, &mut seeded_rng(seed)).map(Into::into).map_err(py_err)
}

/// Low-pass Fourier data of a spike train with minimum separation `ms`.
#[pyfunction]
#[pyo3(signature = (n_grid, fc, ms, seed=0))]
fn superres_problem(n_grid: usize, fc: usize, ms: f64, seed: u64) -> PyResult<PyProblem> {
    ProblemInstance::superres(&SuperResSpec { n_grid, fc }, ms, &mut seeded_rng(seed)).map(Into::into).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, n, s, sigma_noise, seed=0))]
fn noisy_problem(m: usize, n: usize, s: usize, sigma_noise: f64, seed: u64) -> PyResult<PyProblem> {
    ProblemInstance::noisy_gaussian(m, n, s, sigma_noise, &mut seeded_rng(seed)).map(Into::into).map_err(py_err)
}

/// Searches the kernel of `a` for a gNSP violation. Returns
/// `(falsified, witness, support)`; witness and support are empty when
/// nothing was found.
#[pyfunction]
#[pyo3(signature = (a, sigma, s, samples=1000, seed=0))]
fn gnsp_check(a: &PyMatrix, sigma: f64, s: usize, samples: usize, seed: u64) -> PyResult<(bool, Vec<f64>, Vec<usize>)> {
    match gnsp_falsifier(&a.inner, sigma, s, samples, &mut seeded_rng(seed)).map_err(py_err)? {
        GnspVerdict::Falsified { witness, support } => Ok((true, witness, support.indices().to_vec())),
        GnspVerdict::Undetermined { .. } => Ok((false, Vec::new(), Vec::new())),
    }
}

#[pymodule(name = "erf_sparse")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(erf_phi, m)?)?;
    m.add_function(wrap_pyfunction!(erf_weight, m)?)?;
    m.add_function(wrap_pyfunction!(erf_prox, m)?)?;
    m.add_function(wrap_pyfunction!(tl1_prox, m)?)?;
    m.add_function(wrap_pyfunction!(soft_shrink, m)?)?;
    m.add_function(wrap_pyfunction!(penalty, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(dct_problem, m)?)?;
    m.add_function(wrap_pyfunction!(superres_problem, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_problem, m)?)?;
    m.add_function(wrap_pyfunction!(gnsp_check, m)?)?;
    Ok(())
}
