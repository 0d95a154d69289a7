//! Python bindings: scenario configuration, the simulation pipeline, the
//! sweep harness, and the numerics most useful for analysis scripts.
//!
//! Complex matrices cross the boundary as lists of lists of Python
//! complex numbers, row-major.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use iatrx_core::config::NetworkConfig;
use iatrx_core::matrix::CMat;
use iatrx_core::outer::{cggm, CggmOptions};
use iatrx_core::sim::{run_scenario, Baseline, MetricsRecord};
use iatrx_core::sweep::{sweep as run_sweep, SweepAxis, SweepSpec};
use iatrx_core::tracker::{track, FdpmState};

fn to_cmat(rows: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(PyValueError::new_err("matrix must be non-empty"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged rows"));
    }
    Ok(CMat::from_rows(&rows))
}

fn from_cmat(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Scenario configuration. Fields are addressed by their file keys
/// (`B`, `K`, `M`, `N`, `d`, `m_b`, `P_T`, `gamma_bar`, ...).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Config {
    inner: NetworkConfig,
}

#[pymethods]
impl Config {
    /// Default scenario (3 cells, 4 users, 8x2 antennas).
    #[new]
    fn new() -> Config {
        Config {
            inner: NetworkConfig::default(),
        }
    }

    /// Parse the flat `key = value` format; missing keys keep defaults.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Config> {
        NetworkConfig::parse(text)
            .map(|inner| Config { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Config> {
        NetworkConfig::load(path)
            .map(|inner| Config { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner
            .set_key(key, value)
            .map_err(PyValueError::new_err)?;
        self.inner
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn get(&self, key: &str) -> PyResult<String> {
        if iatrx_core::config::KEYS.contains(&key) {
            Ok(self.inner.get_key(key))
        } else {
            Err(PyValueError::new_err(format!("unknown key `{key}`")))
        }
    }

    /// Render in the file format.
    fn text(&self) -> String {
        self.inner.to_file_string()
    }

    fn keys(&self) -> Vec<&'static str> {
        iatrx_core::config::KEYS.to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(B={}, K={}, M={}, N={}, d={}, m_b={}, seed={})",
            self.inner.cells,
            self.inner.users_per_cell,
            self.inner.tx_antennas,
            self.inner.rx_antennas,
            self.inner.streams,
            self.inner.inner_dim,
            self.inner.seed
        )
    }
}

fn parse_baseline(name: &str) -> PyResult<Baseline> {
    name.parse().map_err(PyValueError::new_err)
}

fn records_to_py(py: Python<'_>, records: &[MetricsRecord]) -> PyResult<Py<PyList>> {
    let rows = PyList::empty(py);
    for record in records {
        for (cell_idx, cell) in record.cells.iter().enumerate() {
            for (user_idx, user) in cell.users.iter().enumerate() {
                let row = PyDict::new(py);
                row.set_item("t", record.t)?;
                row.set_item("cell", cell_idx)?;
                row.set_item("rate_bps_hz", cell.rate)?;
                row.set_item("ee_bps_hz_per_w", cell.ee)?;
                row.set_item("user", user_idx)?;
                row.set_item("slnr", user.slnr)?;
                row.set_item("power_w", user.power_w)?;
                row.set_item("lif_iui", user.lif_iui)?;
                row.set_item("lif_ici", user.lif_ici)?;
                row.set_item("ia_residual", user.ia_residual)?;
                row.set_item("f_subspace_dist", user.f_subspace_dist)?;
                row.set_item("u_subspace_dist", user.u_subspace_dist)?;
                row.set_item("gate_updated", cell.gate_updated)?;
                row.set_item("inner_feasible", cell.inner_feasible)?;
                row.set_item("ee_iterations", cell.q_trace.len())?;
                row.set_item("seed", record.seed)?;
                rows.append(row)?;
            }
        }
    }
    Ok(rows.into())
}

/// Run one scenario; one dict per (instant, cell, user).
#[pyfunction]
#[pyo3(signature = (config, seed=None, baseline="none"))]
fn simulate(
    py: Python<'_>,
    config: &Config,
    seed: Option<u64>,
    baseline: &str,
) -> PyResult<Py<PyList>> {
    let mut cfg = config.inner.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let records = run_scenario(&cfg, parse_baseline(baseline)?);
    records_to_py(py, &records)
}

/// Run one scenario and return the CSV table.
#[pyfunction]
#[pyo3(signature = (config, seed=None, baseline="none"))]
fn simulate_csv(config: &Config, seed: Option<u64>, baseline: &str) -> PyResult<String> {
    let mut cfg = config.inner.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let records = run_scenario(&cfg, parse_baseline(baseline)?);
    Ok(iatrx_core::export::to_csv(&records))
}

/// Monte Carlo sweep; one dict per grid value.
#[pyfunction]
#[pyo3(signature = (config, axis, values, drops=100, baseline="none"))]
fn sweep(
    py: Python<'_>,
    config: &Config,
    axis: &str,
    values: Vec<f64>,
    drops: usize,
    baseline: &str,
) -> PyResult<Py<PyList>> {
    let axis: SweepAxis = axis.parse().map_err(PyValueError::new_err)?;
    let spec = SweepSpec {
        axis,
        values,
        drops,
        base: config.inner.clone(),
        baseline: parse_baseline(baseline)?,
    };
    let rows = run_sweep(&spec);
    let out = PyList::empty(py);
    for row in rows {
        let d = PyDict::new(py);
        d.set_item("axis", axis.name())?;
        d.set_item("value", row.axis_value)?;
        d.set_item("rate_mean", row.rate_mean)?;
        d.set_item("rate_se", row.rate_se)?;
        d.set_item("ee_mean", row.ee_mean)?;
        d.set_item("ee_se", row.ee_se)?;
        d.set_item("drops", row.drops)?;
        d.set_item("infeasible_drops", row.infeasible_drops)?;
        out.append(d)?;
    }
    Ok(out.into())
}

/// Zero-order Bessel function of the first kind.
#[pyfunction]
fn bessel_j0(x: f64) -> PyResult<f64> {
    iatrx_core::bessel_j0(x).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Temporal correlation coefficient for the given mobility
/// (speed m/s, carrier Hz, symbol period s).
#[pyfunction]
fn doppler_alpha(speed_mps: f64, carrier_hz: f64, symbol_period_s: f64) -> PyResult<f64> {
    iatrx_core::doppler_alpha(speed_mps, carrier_hz, symbol_period_s)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Eigendecomposition of a Hermitian matrix: (ascending values, column
/// eigenvectors).
#[pyfunction]
fn hermitian_eig(matrix: Vec<Vec<Complex64>>) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let a = to_cmat(matrix)?;
    let eig = iatrx_core::hermitian_eig(&a).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((eig.values, from_cmat(&eig.vectors)))
}

/// Orthonormal basis of the m smallest-eigenvalue invariant subspace.
#[pyfunction]
fn minor_subspace(matrix: Vec<Vec<Complex64>>, m: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let a = to_cmat(matrix)?;
    iatrx_core::minor_subspace(&a, m)
        .map(|f| from_cmat(&f))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Chordal distance between the column spans of two orthonormal matrices.
#[pyfunction]
fn subspace_distance(u1: Vec<Vec<Complex64>>, u2: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let a = to_cmat(u1)?;
    let b = to_cmat(u2)?;
    iatrx_core::subspace_distance(&a, &b).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Minimize Tr(F^H Phi F) over orthonormal F by conjugate gradient on the
/// Grassmann manifold, from a random start.
#[pyfunction]
#[pyo3(signature = (matrix, m, seed=0, max_iters=100))]
fn cggm_minimize(
    py: Python<'_>,
    matrix: Vec<Vec<Complex64>>,
    m: usize,
    seed: u64,
    max_iters: usize,
) -> PyResult<Py<PyDict>> {
    let phi = to_cmat(matrix)?;
    if m == 0 || m > phi.rows() {
        return Err(PyValueError::new_err("subspace dimension out of range"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let f0 = iatrx_core::eig::random_orthonormal(phi.rows(), m, &mut rng);
    let opts = CggmOptions {
        max_iters,
        ..CggmOptions::default()
    };
    let state = cggm(&phi, &f0, &opts);
    let out = PyDict::new(py);
    out.set_item("subspace", from_cmat(&state.subspace))?;
    out.set_item("objective", state.objective)?;
    out.set_item("iterations", state.iterations)?;
    out.set_item("converged", state.converged)?;
    out.set_item("stationarity", state.stationarity)?;
    Ok(out.into())
}

/// Track the minor subspace of a sample stream with the fast data
/// projection method. Returns the final filter (rows x d).
#[pyfunction]
#[pyo3(signature = (samples, d, alpha0=-0.5, seed=0))]
fn fdpm_track(
    samples: Vec<Vec<Complex64>>,
    d: usize,
    alpha0: f64,
    seed: u64,
) -> PyResult<Vec<Vec<Complex64>>> {
    if samples.is_empty() {
        return Err(PyValueError::new_err("empty sample stream"));
    }
    let n = samples[0].len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(PyValueError::new_err("ragged samples"));
    }
    if d == 0 || d > n {
        return Err(PyValueError::new_err("subspace dimension out of range"));
    }
    if alpha0 >= 0.0 {
        return Err(PyValueError::new_err("alpha0 must be negative (minor tracking)"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let u0 = iatrx_core::eig::random_orthonormal(n, d, &mut rng);
    let state = FdpmState::new(u0, alpha0);
    let (end, _trace) = track(&state, samples, iatrx_core::config::StepNorm::X2);
    Ok(from_cmat(&end.filter))
}

#[pymodule]
fn iatrx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_csv, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(doppler_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_eig, m)?)?;
    m.add_function(wrap_pyfunction!(minor_subspace, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(cggm_minimize, m)?)?;
    m.add_function(wrap_pyfunction!(fdpm_track, m)?)?;
    Ok(())
}
