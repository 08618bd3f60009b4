//! Python bindings: `import walkdet`.
//!
//! Observations cross the boundary as row-major nested lists (`M` rows of
//! `N` samples); results come back as small frozen classes.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use walkdet::bounds::{self, ExponentBounds, PhysicsBound};
use walkdet::detector::{self, Decision, LlrResult, Observations};
use walkdet::graphs::{self, Graph as CoreGraph, DEFAULT_LAZINESS, DEFAULT_RGG_RADIUS, DEFAULT_WS_K, DEFAULT_WS_P};
use walkdet::spectral::{self, MarkovChain as CoreChain};
use walkdet::{ldp, montecarlo, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Convergence { .. } | Error::Inversion { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Row-stochastic transition matrix with its stationary distribution.
#[pyclass(frozen, name = "MarkovChain", module = "walkdet")]
struct PyChain {
    inner: CoreChain,
}

#[pymethods]
impl PyChain {
    /// Validate a dense transition matrix (irreducible, aperiodic, rows sum to 1).
    #[new]
    fn new(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: spectral::validate_chain(&matrix).map_err(err)?,
        })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    fn stationary(&self) -> Vec<f64> {
        self.inner.stationary().to_vec()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.inner.to_dense()
    }

    fn is_reversible(&self) -> bool {
        self.inner.is_reversible()
    }

    fn uniform_regular_degree(&self) -> Option<usize> {
        self.inner.uniform_regular_degree()
    }

    /// Entropy rate in nats per step.
    fn entropy_rate(&self) -> f64 {
        spectral::entropy_rate(&self.inner)
    }

    /// `(rho_min, rho_max)`.
    fn rho_extremes(&self) -> (f64, f64) {
        let r = spectral::rho_extremes(&self.inner);
        (r.rho_min, r.rho_max)
    }

    fn path_count_rate(&self) -> PyResult<f64> {
        spectral::path_count_rate(&self.inner).map_err(err)
    }

    fn log_lambda(&self, t: f64) -> PyResult<f64> {
        spectral::log_lambda(&self.inner, t).map_err(err)
    }

    fn log_lambda_deriv(&self, t: f64) -> PyResult<f64> {
        spectral::log_lambda_deriv(&self.inner, t).map_err(err)
    }

    /// `(log_lambda, left, right)` of the Hadamard power at `t`.
    fn spectral_triple(&self, t: f64) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
        let s = self.inner.spectral_triple(t, None).map_err(err)?;
        Ok((s.log_lambda, s.left, s.right))
    }

    fn path_log_prob(&self, states: Vec<usize>) -> PyResult<f64> {
        spectral::path_log_prob(&self.inner, &states).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("MarkovChain(num_states={})", self.inner.num_states())
    }
}

#[pyclass(frozen, name = "Graph", module = "walkdet")]
struct PyGraph {
    inner: CoreGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (num_nodes, edges, directed = false))]
    fn new(num_nodes: usize, edges: Vec<(usize, usize)>, directed: bool) -> PyResult<Self> {
        let mut g = CoreGraph::new(num_nodes, directed);
        for (i, j) in edges {
            g.add_edge(i, j).map_err(err)?;
        }
        Ok(Self { inner: g })
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    /// Directed edge records; an undirected edge appears once per direction.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn neighbors(&self, i: usize) -> PyResult<Vec<usize>> {
        if i >= self.inner.num_nodes() {
            return Err(err(Error::StateOutOfRange {
                state: i,
                m: self.inner.num_nodes(),
            }));
        }
        Ok(self.inner.neighbors(i).to_vec())
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn with_self_loops(&self) -> Self {
        Self {
            inner: self.inner.clone().with_self_loops(),
        }
    }

    /// Uniform random walk; fails on periodic graphs.
    fn uniform_walk(&self) -> PyResult<PyChain> {
        let inner = graphs::uniform_walk_chain(&self.inner).map_err(err)?;
        Ok(PyChain { inner })
    }

    #[pyo3(signature = (eps = DEFAULT_LAZINESS))]
    fn lazy_walk(&self, eps: f64) -> PyResult<PyChain> {
        let inner = graphs::lazy_walk_chain(&self.inner, eps).map_err(err)?;
        Ok(PyChain { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(num_nodes={}, edge_records={}, directed={})",
            self.inner.num_nodes(),
            self.inner.num_edge_records(),
            if self.inner.is_directed() { "True" } else { "False" }
        )
    }
}

fn graph(r: walkdet::Result<CoreGraph>) -> PyResult<PyGraph> {
    r.map(|inner| PyGraph { inner }).map_err(err)
}

#[pyfunction]
fn gen_cycle(n: usize) -> PyResult<PyGraph> {
    graph(graphs::gen_cycle(n))
}

#[pyfunction]
fn gen_grid(w: usize, h: usize) -> PyResult<PyGraph> {
    graph(graphs::gen_grid(w, h))
}

#[pyfunction]
#[pyo3(signature = (n, radius = DEFAULT_RGG_RADIUS, seed = 0))]
fn gen_rgg(py: Python<'_>, n: usize, radius: f64, seed: u64) -> PyResult<PyGraph> {
    graph(py.detach(|| graphs::gen_rgg(n, radius, seed)))
}

#[pyfunction]
#[pyo3(signature = (n, k = DEFAULT_WS_K, p = DEFAULT_WS_P, seed = 0))]
fn gen_watts_strogatz(py: Python<'_>, n: usize, k: usize, p: f64, seed: u64) -> PyResult<PyGraph> {
    graph(py.detach(|| graphs::gen_watts_strogatz(n, k, p, seed)))
}

#[pyclass(frozen, get_all, name = "Bounds", module = "walkdet")]
struct PyBounds {
    beta: f64,
    genie_ub: f64,
    sum_lb: f64,
    physics_lb: f64,
    threshold_beta: f64,
    phi_tilde: f64,
    asymptotic: bool,
}

impl From<ExponentBounds> for PyBounds {
    fn from(b: ExponentBounds) -> Self {
        Self {
            beta: b.beta,
            genie_ub: b.genie_ub,
            sum_lb: b.sum_lb,
            physics_lb: b.physics_lb,
            threshold_beta: b.threshold_beta,
            phi_tilde: b.phi_tilde,
            asymptotic: b.asymptotic,
        }
    }
}

#[pymethods]
impl PyBounds {
    fn __repr__(&self) -> String {
        format!(
            "Bounds(beta={}, genie_ub={}, sum_lb={}, physics_lb={}, threshold_beta={})",
            self.beta, self.genie_ub, self.sum_lb, self.physics_lb, self.threshold_beta
        )
    }
}

#[pyfunction]
fn genie_upper(beta: f64) -> f64 {
    bounds::genie_upper(beta)
}

#[pyfunction]
fn sum_detector_lower(beta: f64, m: usize) -> f64 {
    bounds::sum_detector_lower(beta, m)
}

#[pyfunction]
fn threshold_beta(chain: &PyChain) -> f64 {
    bounds::threshold_beta(&chain.inner)
}

#[pyfunction]
fn physics_lower(py: Python<'_>, chain: &PyChain, beta: f64) -> PyResult<f64> {
    py.detach(|| bounds::physics_lower(&chain.inner, beta)).map_err(err)
}

#[pyfunction]
fn all_bounds(py: Python<'_>, chain: &PyChain, beta: f64) -> PyResult<PyBounds> {
    py.detach(|| bounds::all_bounds(&chain.inner, beta))
        .map(Into::into)
        .map_err(err)
}

/// Bounds on a list of SNRs, sharing one parametric scan.
#[pyfunction]
fn bounds_sweep(py: Python<'_>, chain: &PyChain, betas: Vec<f64>) -> PyResult<Vec<PyBounds>> {
    py.detach(|| {
        let pb = PhysicsBound::new(&chain.inner)?;
        betas
            .iter()
            .map(|&b| pb.all_bounds(b).map(PyBounds::from))
            .collect::<walkdet::Result<Vec<_>>>()
    })
    .map_err(err)
}

/// `(s, t_star)`; `t_star` is None where the slope is not attained.
#[pyfunction]
fn entropy_density(py: Python<'_>, chain: &PyChain, rho: f64) -> PyResult<(f64, Option<f64>)> {
    let p = py.detach(|| ldp::entropy_density(&chain.inner, rho)).map_err(err)?;
    Ok((p.s, p.t_star))
}

#[pyfunction]
fn rate1(py: Python<'_>, chain: &PyChain, rho: f64) -> PyResult<f64> {
    py.detach(|| ldp::rate1(&chain.inner, rho)).map_err(err)
}

#[pyclass(frozen, get_all, name = "Llr", module = "walkdet")]
struct PyLlr {
    ell: f64,
    log_l: f64,
    n: usize,
}

impl From<LlrResult> for PyLlr {
    fn from(r: LlrResult) -> Self {
        Self {
            ell: r.ell,
            log_l: r.log_l,
            n: r.n,
        }
    }
}

#[pymethods]
impl PyLlr {
    /// "H1" when `ell > tau`, else "H0".
    fn decide(&self, tau: f64) -> &'static str {
        let r = LlrResult {
            ell: self.ell,
            log_l: self.log_l,
            n: self.n,
        };
        match detector::neyman_pearson(&r, tau) {
            Decision::H0 => "H0",
            Decision::H1 => "H1",
        }
    }

    fn __repr__(&self) -> String {
        format!("Llr(ell={}, log_l={}, n={})", self.ell, self.log_l, self.n)
    }
}

fn observations(rows: &[Vec<f64>]) -> PyResult<Observations> {
    Observations::from_rows(rows).map_err(err)
}

/// Pure-noise observations, `m` rows by `n` columns.
#[pyfunction]
fn simulate_h0(py: Python<'_>, m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    py.detach(|| detector::simulate_h0(m, n, seed).to_rows())
}

/// `(rows, states)` with the walk's state at each time.
#[pyfunction]
fn simulate_h1(py: Python<'_>, chain: &PyChain, beta: f64, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let obs = py.detach(|| detector::simulate_h1(&chain.inner, beta, n, seed));
    let rows = obs.to_rows();
    (rows, obs.truth.unwrap_or_default())
}

#[pyfunction]
fn log_likelihood_ratio(py: Python<'_>, chain: &PyChain, beta: f64, rows: Vec<Vec<f64>>) -> PyResult<PyLlr> {
    let obs = observations(&rows)?;
    py.detach(|| detector::log_likelihood_ratio(&chain.inner, beta, &obs))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn brute_force_llr(py: Python<'_>, chain: &PyChain, beta: f64, rows: Vec<Vec<f64>>) -> PyResult<PyLlr> {
    let obs = observations(&rows)?;
    py.detach(|| detector::brute_force_llr(&chain.inner, beta, &obs))
        .map(Into::into)
        .map_err(err)
}

/// ROC as a list of `(tau, pf, pm)`.
#[pyfunction]
fn estimate_roc(
    py: Python<'_>,
    chain: &PyChain,
    beta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let roc = py
        .detach(|| detector::estimate_roc(&chain.inner, beta, n, trials, seed))
        .map_err(err)?;
    Ok(roc.into_iter().map(|p| (p.tau, p.pf, p.pm)).collect())
}

#[pyclass(frozen, get_all, name = "ExponentEstimate", module = "walkdet")]
struct PyEstimate {
    eta_hat: f64,
    stderr: f64,
    trials: usize,
    n: usize,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "ExponentEstimate(eta_hat={}, stderr={}, trials={}, n={})",
            self.eta_hat, self.stderr, self.trials, self.n
        )
    }
}

/// Monte Carlo estimate of the miss exponent from `trials` H0 runs of length `n`.
#[pyfunction]
fn estimate_exponent(
    py: Python<'_>,
    chain: &PyChain,
    beta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<PyEstimate> {
    let e = py
        .detach(|| montecarlo::estimate_exponent(&chain.inner, beta, n, trials, seed))
        .map_err(err)?;
    Ok(PyEstimate {
        eta_hat: e.eta_hat,
        stderr: e.stderr,
        trials: e.trials,
        n: e.n,
    })
}

#[pymodule]
#[pyo3(name = "walkdet")]
fn walkdet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyBounds>()?;
    m.add_class::<PyLlr>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(gen_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_grid, m)?)?;
    m.add_function(wrap_pyfunction!(gen_rgg, m)?)?;
    m.add_function(wrap_pyfunction!(gen_watts_strogatz, m)?)?;
    m.add_function(wrap_pyfunction!(genie_upper, m)?)?;
    m.add_function(wrap_pyfunction!(sum_detector_lower, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_beta, m)?)?;
    m.add_function(wrap_pyfunction!(physics_lower, m)?)?;
    m.add_function(wrap_pyfunction!(all_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_density, m)?)?;
    m.add_function(wrap_pyfunction!(rate1, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_h0, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_h1, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_llr, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_roc, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_exponent, m)?)?;
    Ok(())
}
