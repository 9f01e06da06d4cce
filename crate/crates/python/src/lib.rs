//! Python bindings for the `its_track` crate.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use its_track::channel::{self, build_geometry};
use its_track::config::{parse_config_str, ExperimentSpec};
use its_track::control;
use its_track::estimator::{self, PhiGrid};
use its_track::experiment;
use its_track::priors::{self, penalty_weights};
use its_track::sim::{self, Scheme, SimConfig};
use its_track::{MismatchKind, ObservationContext, StaticChannel, TrackError};

fn value_error(e: TrackError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    Scheme::ALL
        .into_iter()
        .find(|s| s.as_str() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scheme `{name}`")))
}

fn parse_mismatch(name: &str) -> PyResult<MismatchKind> {
    [MismatchKind::Conservative, MismatchKind::OverConfident, MismatchKind::None]
        .into_iter()
        .find(|m| m.as_str() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown mismatch regime `{name}`")))
}

/// Uniform linear ITS with half-wavelength spacing.
#[pyclass(name = "Geometry", module = "its_track_py", skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry {
    inner: channel::ItsGeometry,
}

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (num_elements = 64, carrier_frequency = 30e9, antenna_position = [-1.0, 0.0, 0.0]))]
    fn new(num_elements: usize, carrier_frequency: f64, antenna_position: [f64; 3]) -> PyResult<Self> {
        let inner = build_geometry(num_elements, carrier_frequency, antenna_position).map_err(value_error)?;
        Ok(PyGeometry { inner })
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength
    }

    #[getter]
    fn element_positions(&self) -> Vec<f64> {
        self.inner.element_positions.clone()
    }

    fn array_response(&self, phi: f64) -> Vec<Complex64> {
        channel::array_response(phi, &self.inner)
    }

    /// Deterministic LoS feed channel.
    #[pyo3(signature = (rho0 = 1.0))]
    fn los_channel(&self, rho0: f64) -> PyResult<Vec<Complex64>> {
        channel::los_channel(&self.inner, rho0).map_err(value_error)
    }

    /// Codewords of the DFT codebook, one list per beam.
    fn dft_codebook(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(control::dft_codebook(&self.inner).map_err(value_error)?.codewords)
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(num_elements={}, carrier_frequency={:e})",
            self.inner.num_elements, self.inner.carrier_frequency
        )
    }
}

/// Channel gain `beta`, phase `omega` and AoA `phi`.
#[pyclass(name = "ChannelState", module = "its_track_py", get_all, set_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyChannelState {
    beta: f64,
    omega: f64,
    phi: f64,
}

impl From<channel::ChannelState> for PyChannelState {
    fn from(s: channel::ChannelState) -> Self {
        PyChannelState {
            beta: s.beta,
            omega: s.omega,
            phi: s.phi,
        }
    }
}

impl PyChannelState {
    fn inner(&self) -> channel::ChannelState {
        channel::ChannelState::new(self.beta, self.omega, self.phi)
    }
}

#[pymethods]
impl PyChannelState {
    #[new]
    fn new(beta: f64, omega: f64, phi: f64) -> Self {
        channel::ChannelState::new(beta, omega, phi).into()
    }

    /// `g = beta e^{j omega} a(phi)` on the given array.
    fn channel(&self, geometry: &PyGeometry) -> Vec<Complex64> {
        channel::synthesize_g(&self.inner(), &geometry.inner)
    }

    fn __repr__(&self) -> String {
        format!("ChannelState(beta={:e}, omega={}, phi={})", self.beta, self.omega, self.phi)
    }
}

/// Per-block priors: Gaussian on the gain and AoA, von Mises on the phase.
#[pyclass(name = "PriorSet", module = "its_track_py", skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyPriorSet {
    inner: priors::PriorSet,
}

#[pymethods]
impl PyPriorSet {
    #[new]
    fn new(mu_beta: f64, sigma_beta: f64, mu_phi: f64, sigma_phi: f64, mu_omega: f64, kappa: f64) -> Self {
        PyPriorSet {
            inner: priors::PriorSet::new(mu_beta, sigma_beta, mu_phi, sigma_phi, mu_omega, kappa),
        }
    }

    fn search_interval(&self) -> (f64, f64) {
        self.inner.search_interval()
    }

    #[getter]
    fn mu_phi(&self) -> f64 {
        self.inner.mu_phi
    }

    #[getter]
    fn delta_phi(&self) -> f64 {
        self.inner.delta_phi
    }
}

#[pyclass(name = "MapResult", module = "its_track_py", get_all)]
struct PyMapResult {
    state: PyChannelState,
    objective: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// MAP estimate of one block from the pilots `y` received through the ITS
/// configurations `theta_rows`.
#[pyfunction]
#[pyo3(signature = (y, theta_rows, h, pilot_power, sigma2, priors, grid_points = 201))]
fn map_estimate(
    y: Vec<Complex64>,
    theta_rows: Vec<Vec<Complex64>>,
    h: Vec<Complex64>,
    pilot_power: f64,
    sigma2: f64,
    priors: &PyPriorSet,
    grid_points: usize,
) -> PyResult<PyMapResult> {
    let weights = penalty_weights(sigma2, &priors.inner);
    let ctx = ObservationContext::new(y, theta_rows, StaticChannel::new(h), pilot_power, sigma2, priors.inner, weights)
        .map_err(value_error)?;
    let grid = PhiGrid::around(&priors.inner, grid_points).map_err(value_error)?;
    let est = estimator::map_estimate(&ctx, &grid);
    Ok(PyMapResult {
        state: est.state.into(),
        objective: est.objective,
        iterations: est.iterations,
        converged: est.converged,
        trace: est.trace,
    })
}

/// Prior-free ML estimate over a uniform grid on `[-pi/2, pi/2]`.
#[pyfunction]
#[pyo3(signature = (y, theta_rows, h, pilot_power, grid_points = 2001))]
fn ml_estimate(
    y: Vec<Complex64>,
    theta_rows: Vec<Vec<Complex64>>,
    h: Vec<Complex64>,
    pilot_power: f64,
    grid_points: usize,
) -> PyResult<PyChannelState> {
    if y.len() != theta_rows.len() || theta_rows.iter().any(|r| r.len() != h.len()) {
        return Err(PyValueError::new_err("need one configuration of length len(h) per pilot"));
    }
    let grid = PhiGrid::full(grid_points).map_err(value_error)?;
    Ok(estimator::ml_estimate(&y, &theta_rows, &StaticChannel::new(h), pilot_power, &grid).into())
}

/// ITS configuration maximising `|theta^T (h * g_hat)|`.
#[pyfunction]
fn se_max_config(h: Vec<Complex64>, g_hat: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    if h.len() != g_hat.len() {
        return Err(PyValueError::new_err("h and g_hat differ in length"));
    }
    Ok(control::se_max_config(&h, &g_hat))
}

#[pyfunction]
fn spectral_efficiency(
    theta: Vec<Complex64>,
    h: Vec<Complex64>,
    g: Vec<Complex64>,
    power: f64,
    sigma2: f64,
) -> PyResult<f64> {
    if theta.len() != h.len() || h.len() != g.len() {
        return Err(PyValueError::new_err("theta, h and g differ in length"));
    }
    Ok(control::spectral_efficiency(&theta, &h, &g, power, sigma2))
}

#[pyfunction]
fn vonmises_logpdf(omega: f64, mu: f64, kappa: f64) -> PyResult<f64> {
    priors::vonmises_logpdf(omega, mu, kappa).map_err(value_error)
}

#[pyclass(name = "MetricsRow", module = "its_track_py", get_all)]
struct PyMetricsRow {
    snr_db: f64,
    nmse_channel: f64,
    nmse_aoa: f64,
    mean_se: f64,
    mean_se_perfect_csi: f64,
    trials: usize,
}

#[pyclass(name = "Trial", module = "its_track_py", get_all)]
struct PyTrial {
    trial: u64,
    sigma2: f64,
    true_phi: Vec<f64>,
    estimated_phi: Vec<f64>,
    se: Vec<f64>,
    se_perfect: Vec<f64>,
    channel_sq_error: f64,
    channel_sq_norm: f64,
}

/// Monte Carlo simulator for one scheme and mismatch regime.
#[pyclass(name = "Simulator", module = "its_track_py")]
struct PySimulator {
    inner: sim::Simulator,
}

#[pymethods]
impl PySimulator {
    #[new]
    #[pyo3(signature = (scheme = "map_myopic", mismatch = "conservative", num_trials = None, num_blocks = None, snr_db = None, seed = None))]
    fn new(
        scheme: &str,
        mismatch: &str,
        num_trials: Option<usize>,
        num_blocks: Option<usize>,
        snr_db: Option<Vec<f64>>,
        seed: Option<u64>,
    ) -> PyResult<Self> {
        let base = SimConfig::default();
        let cfg = SimConfig {
            scheme: parse_scheme(scheme)?,
            mismatch: parse_mismatch(mismatch)?,
            num_trials: num_trials.unwrap_or(base.num_trials),
            num_blocks: num_blocks.unwrap_or(base.num_blocks),
            snr_grid_db: snr_db.unwrap_or(base.snr_grid_db.clone()),
            seed: seed.unwrap_or(base.seed),
            ..base
        };
        Ok(PySimulator {
            inner: sim::Simulator::new(cfg).map_err(value_error)?,
        })
    }

    /// Simulator for `scheme` with every other setting taken from a TOML
    /// configuration text.
    #[staticmethod]
    #[pyo3(signature = (text, scheme = "map_myopic"))]
    fn from_config(text: &str, scheme: &str) -> PyResult<Self> {
        let spec = parse_config_str(text, Path::new("<string>")).map_err(value_error)?;
        let cfg = SimConfig {
            scheme: parse_scheme(scheme)?,
            ..spec.sim
        };
        Ok(PySimulator {
            inner: sim::Simulator::new(cfg).map_err(value_error)?,
        })
    }

    fn run_trial(&self, py: Python<'_>, snr_db: f64, trial: u64) -> PyResult<PyTrial> {
        let r = py.detach(|| self.inner.run_trial(snr_db, trial)).map_err(value_error)?;
        Ok(PyTrial {
            trial: r.trial,
            sigma2: r.sigma2,
            true_phi: r.blocks.iter().map(|b| b.truth.phi).collect(),
            estimated_phi: r.blocks.iter().map(|b| b.estimate.phi).collect(),
            se: r.blocks.iter().map(|b| b.se).collect(),
            se_perfect: r.blocks.iter().map(|b| b.se_perfect).collect(),
            channel_sq_error: r.channel_sq_error,
            channel_sq_norm: r.channel_sq_norm,
        })
    }

    /// One row per SNR of the configured grid.
    fn run_monte_carlo(&self, py: Python<'_>) -> PyResult<Vec<PyMetricsRow>> {
        let table = py.detach(|| self.inner.run_monte_carlo()).map_err(value_error)?;
        Ok(table
            .rows
            .iter()
            .map(|r| PyMetricsRow {
                snr_db: r.snr_db,
                nmse_channel: r.nmse_channel,
                nmse_aoa: r.nmse_aoa,
                mean_se: r.mean_se,
                mean_se_perfect_csi: r.mean_se_perfect_csi,
                trials: r.trials,
            })
            .collect())
    }
}

/// The default experiment configuration as TOML.
#[pyfunction]
fn default_config() -> String {
    ExperimentSpec::default().to_toml()
}

/// Runs the experiment described by a TOML text and returns the CSV tables
/// keyed by file name, without touching the file system.
#[pyfunction]
fn render_outputs(py: Python<'_>, text: &str) -> PyResult<BTreeMap<&'static str, String>> {
    let spec = parse_config_str(text, Path::new("<string>")).map_err(value_error)?;
    py.detach(|| experiment::render_outputs(&spec)).map_err(value_error)
}

#[pymodule]
fn its_track_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyChannelState>()?;
    m.add_class::<PyPriorSet>()?;
    m.add_class::<PyMapResult>()?;
    m.add_class::<PyMetricsRow>()?;
    m.add_class::<PyTrial>()?;
    m.add_class::<PySimulator>()?;
    m.add_function(wrap_pyfunction!(map_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(ml_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(se_max_config, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(vonmises_logpdf, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(render_outputs, m)?)?;
    Ok(())
}
