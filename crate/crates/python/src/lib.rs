//! Python bindings for the visibility-region channel modeling toolkit.
//!
//! The surface mirrors the core crate's main operations with plain Python
//! types: interval simulation and censored inference, information bounds,
//! spatial correlation, chord-based radius recovery, the Gaussian
//! component gain, and full channel synthesis with condition-number
//! statistics. Scenarios travel as TOML strings so Python can edit them
//! textually before synthesis.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

use cost2100x_core::bsvr::{
    fim_crlb, generate_bsvrs, mle_exponential as core_mle, mome as core_mome,
    sufficient_stats, BsVrProcessParams, ExponentialMle, ObservedIntervalSet,
};
use cost2100x_core::channel::{
    condition_number_db, synthesize as core_synthesize, ChannelScenario, ChannelTensor,
};
use cost2100x_core::correlation::{
    acf_bs as core_acf_bs, acf_circular as core_acf_circular,
    acf_circular_mixture as core_acf_mixture,
};
use cost2100x_core::error::Error as CoreError;
use cost2100x_core::harness::io::class_label;
use cost2100x_core::harness::sweep::burn_in_for;
use cost2100x_core::lifetime::LifetimeDistribution;
use cost2100x_core::mpc::chord::{chord_cdf as core_chord_cdf, RadiusDistribution, RadiusPmf};
use cost2100x_core::mpc::fit::fit_lognormal_to_pmf as core_fit_pmf;
use cost2100x_core::mpc::gain::{
    required_num_mpcs as core_required, sample_radius as core_sample_radius,
    GainFunctionParams,
};
use cost2100x_core::mpc::qp::solve_radius_weights as core_solve;
use cost2100x_core::rng;

fn err(e: CoreError) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn lifetime_from(kind: &str, a: f64, b: Option<f64>) -> PyResult<LifetimeDistribution> {
    match kind {
        "exponential" => Ok(LifetimeDistribution::Exponential { scale: a }),
        "lognormal_db" => {
            let sigma2 = b.ok_or_else(|| {
                PyValueError::new_err("lognormal_db lifetimes need (mu, sigma2)")
            })?;
            Ok(LifetimeDistribution::LognormalDb { mu: a, sigma2 })
        }
        other => Err(PyValueError::new_err(format!(
            "unknown lifetime kind {other:?}; use \"exponential\" or \"lognormal_db\""
        ))),
    }
}

fn interval_set(
    intervals: Vec<(f64, f64)>,
    window: (f64, f64),
    delta0: f64,
) -> PyResult<ObservedIntervalSet> {
    ObservedIntervalSet::new(intervals, window, delta0).map_err(err)
}

fn set_to_dict<'py>(py: Python<'py>, set: &ObservedIntervalSet) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("intervals", set.intervals().to_vec())?;
    let classes: Vec<&str> = (0..set.len()).map(|i| class_label(set.class_of(i))).collect();
    d.set_item("classes", classes)?;
    d.set_item("window", set.window())?;
    d.set_item("delta0", set.delta0())?;
    let counts = set.counts();
    let c = PyDict::new(py);
    c.set_item("interior", counts.n00)?;
    c.set_item("right_censored", counts.n01)?;
    c.set_item("left_censored", counts.n10)?;
    c.set_item("doubly_censored", counts.n11)?;
    d.set_item("counts", c)?;
    Ok(d)
}

/// Simulates one censored realization of the visibility-interval process.
#[pyfunction]
#[pyo3(signature = (lam, window, delta0=0.0, seed=0, kind="exponential", scale=2.9, sigma2=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_bsvr<'py>(
    py: Python<'py>,
    lam: f64,
    window: f64,
    delta0: f64,
    seed: u64,
    kind: &str,
    scale: f64,
    sigma2: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let lifetime = lifetime_from(kind, scale, sigma2)?;
    let params = BsVrProcessParams {
        lambda: lam,
        lifetime,
        x1: 0.0,
        x2: window,
        delta0,
    };
    params.validate().map_err(err)?;
    let set = generate_bsvrs(&params, burn_in_for(&lifetime, lam), seed).map_err(err)?;
    set_to_dict(py, &set)
}

/// Closed-form censored maximum-likelihood fit of the exponential model.
///
/// Returns ``{"outcome": "estimate", "lambda": .., "scale": ..}`` or
/// ``{"outcome": "infinite_lifetime"}`` when every interval spans the
/// window.
#[pyfunction]
fn mle_exponential<'py>(
    py: Python<'py>,
    intervals: Vec<(f64, f64)>,
    window: (f64, f64),
    delta0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let set = interval_set(intervals, window, delta0)?;
    let stats = sufficient_stats(&set);
    let d = PyDict::new(py);
    match core_mle(&stats).map_err(err)? {
        ExponentialMle::Estimate { lambda, scale } => {
            d.set_item("outcome", "estimate")?;
            d.set_item("lambda", lambda)?;
            d.set_item("scale", scale)?;
        }
        ExponentialMle::InfiniteLifetime => {
            d.set_item("outcome", "infinite_lifetime")?;
        }
    }
    Ok(d)
}

/// Method-of-moments fit; returns ``(lambda, scale)``.
#[pyfunction]
fn mome(
    intervals: Vec<(f64, f64)>,
    window: (f64, f64),
    delta0: f64,
) -> PyResult<(f64, f64)> {
    let set = interval_set(intervals, window, delta0)?;
    core_mome(&sufficient_stats(&set)).map_err(err)
}

/// Fisher information and variance bounds at a model point.
#[pyfunction]
#[pyo3(signature = (lam, scale, l0, delta0=0.0, windows=1))]
fn crlb<'py>(
    py: Python<'py>,
    lam: f64,
    scale: f64,
    l0: f64,
    delta0: f64,
    windows: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let info = fim_crlb(lam, scale, l0, delta0).map_err(err)?.with_replicates(windows);
    let d = PyDict::new(py);
    d.set_item("fisher_information", info.matrix.to_vec())?;
    d.set_item("crlb_lambda", info.crlb_lambda)?;
    d.set_item("crlb_scale", info.crlb_scale)?;
    d.set_item("normalized_crlb", info.normalized_crlb)?;
    d.set_item("relative_rmse_floor", info.relative_rmse_floor())?;
    Ok(d)
}

/// Censored log-likelihood of ``(lam, lifetime)`` on an interval set.
#[pyfunction]
#[pyo3(signature = (lam, intervals, window, delta0, kind="exponential", scale=2.9, sigma2=None))]
fn log_likelihood(
    lam: f64,
    intervals: Vec<(f64, f64)>,
    window: (f64, f64),
    delta0: f64,
    kind: &str,
    scale: f64,
    sigma2: Option<f64>,
) -> PyResult<f64> {
    let lifetime = lifetime_from(kind, scale, sigma2)?;
    let set = interval_set(intervals, window, delta0)?;
    cost2100x_core::bsvr::log_likelihood(lam, &lifetime, &set).map_err(err)
}

/// Interval-occupancy autocorrelation at array separation ``d``.
#[pyfunction]
#[pyo3(signature = (d, kind="exponential", scale=2.9, sigma2=None))]
fn acf_bs(d: f64, kind: &str, scale: f64, sigma2: Option<f64>) -> PyResult<f64> {
    let lifetime = lifetime_from(kind, scale, sigma2)?;
    core_acf_bs(d, &lifetime).map_err(err)
}

/// Disc-overlap autocorrelation at user separation ``d`` for radius ``r``.
#[pyfunction]
fn acf_circular(d: f64, r: f64) -> f64 {
    core_acf_circular(d, r)
}

/// Disc-overlap autocorrelation under a dB-lognormal radius law.
#[pyfunction]
fn acf_circular_mixture(d: f64, mu: f64, sigma2: f64) -> PyResult<f64> {
    let dist = RadiusDistribution::LognormalDb { mu, sigma2 };
    core_acf_mixture(d, &dist).map_err(err)
}

/// CDF of the chord length cut by a random line through a disc of radius
/// ``r``.
#[pyfunction]
fn chord_cdf(y: f64, r: f64) -> f64 {
    core_chord_cdf(y, r)
}

/// Gaussian component gain ``exp(-|p - c|^2 / (2 w^2))``.
#[pyfunction]
fn gain(center: (f64, f64), width: f64, point: (f64, f64)) -> PyResult<f64> {
    let params = GainFunctionParams {
        center: [center.0, center.1],
        width,
    };
    params.validate().map_err(err)?;
    Ok(params.gain([point.0, point.1]))
}

/// Draws one dB-lognormal disc radius.
#[pyfunction]
#[pyo3(signature = (mu, sigma2, seed=0))]
fn sample_radius(mu: f64, sigma2: f64, seed: u64) -> f64 {
    core_sample_radius(mu, sigma2, &mut rng::master(seed))
}

/// Component count needed so the expected visible number is ``n_eff``.
#[pyfunction]
fn required_num_mpcs(n_eff: f64, r_c: f64, mu_r: f64, sigma2_r: f64) -> PyResult<u64> {
    core_required(n_eff, r_c, mu_r, sigma2_r).map_err(err)
}

/// Least-squares radius distribution whose chord mixture matches
/// ``target`` on ``chord_grid``, over the probability simplex.
#[pyfunction]
fn solve_radius_weights<'py>(
    py: Python<'py>,
    chord_grid: Vec<f64>,
    target: Vec<f64>,
    radii: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let solution = core_solve(&chord_grid, &target, &radii).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("radii", solution.pmf.radii().to_vec())?;
    d.set_item("weights", solution.pmf.weights().to_vec())?;
    d.set_item("rmse", solution.rmse)?;
    d.set_item("objective", solution.objective)?;
    d.set_item("kkt_residual", solution.kkt_residual)?;
    d.set_item("iterations", solution.iterations)?;
    d.set_item("converged", solution.converged)?;
    Ok(d)
}

/// dB-lognormal summary of a radius distribution's cumulative weights.
#[pyfunction]
#[pyo3(signature = (radii, weights, min_radius=0.025))]
fn fit_lognormal_to_pmf<'py>(
    py: Python<'py>,
    radii: Vec<f64>,
    weights: Vec<f64>,
    min_radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pmf = RadiusPmf::new(radii, weights).map_err(err)?;
    let fit = core_fit_pmf(&pmf, min_radius).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mu", fit.mu)?;
    d.set_item("sigma2", fit.sigma2)?;
    d.set_item("rmse", fit.rmse)?;
    d.set_item("evaluations", fit.evaluations)?;
    Ok(d)
}

/// Bundled scenario description (TOML) for the indoor compact-array case.
#[pyfunction]
fn indoor_scenario_toml() -> PyResult<String> {
    toml::to_string_pretty(&cost2100x_core::channel::scenario::indoor_cla())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Bundled scenario description (TOML) for the outdoor large-array case.
#[pyfunction]
fn outdoor_scenario_toml() -> PyResult<String> {
    toml::to_string_pretty(&cost2100x_core::channel::scenario::outdoor_vla())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Twin-cluster scenario description (TOML) with controlled angular
/// spreads.
#[pyfunction]
fn twin_scenario_toml(
    omega_ms_deg: f64,
    omega_bs_deg: f64,
    num_users: usize,
    num_antennas: usize,
    n_mpc_eff: f64,
) -> PyResult<String> {
    let scenario = cost2100x_core::channel::scenario::twin_cluster_scenario(
        omega_ms_deg,
        omega_bs_deg,
        num_users,
        num_antennas,
        n_mpc_eff,
    )
    .map_err(err)?;
    toml::to_string_pretty(&scenario).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A synthesized user x antenna x snapshot x frequency channel tensor.
#[pyclass]
struct ChannelField {
    inner: ChannelTensor,
}

#[pymethods]
impl ChannelField {
    /// ``(users, antennas, snapshots, freq_bins)``.
    fn dims(&self) -> (usize, usize, usize, usize) {
        self.inner.dims()
    }

    /// Complex gain at ``(user, antenna, snapshot, bin)`` as ``(re, im)``.
    fn at(&self, k: usize, m: usize, t: usize, b: usize) -> PyResult<(f64, f64)> {
        let (nk, nm, nt, nb) = self.inner.dims();
        if k >= nk || m >= nm || t >= nt || b >= nb {
            return Err(PyValueError::new_err(format!(
                "index ({k}, {m}, {t}, {b}) out of range for dims ({nk}, {nm}, {nt}, {nb})"
            )));
        }
        Ok(self.inner.at(k, m, t, b))
    }

    /// Total energy of one user's slice.
    fn user_energy(&self, k: usize) -> PyResult<f64> {
        if k >= self.inner.dims().0 {
            return Err(PyValueError::new_err(format!("user {k} out of range")));
        }
        Ok(self.inner.user_energy(k))
    }

    /// Per-(snapshot, bin) dB condition numbers and their summary.
    fn condition_numbers<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let summary = condition_number_db(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("kappa_db", summary.kappa_db)?;
        d.set_item("mean_db", summary.mean_db)?;
        d.set_item("median_db", summary.median_db)?;
        d.set_item("infinite_count", summary.infinite_count)?;
        d.set_item("finite_count", summary.finite_count)?;
        Ok(d)
    }

    /// Writes the tensor as binary (dimension header + little-endian
    /// interleaved re/im doubles).
    fn save(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        let mut writer = std::io::BufWriter::new(file);
        self.inner.write_binary(&mut writer).map_err(err)?;
        use std::io::Write as _;
        writer
            .flush()
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Synthesizes the channel tensor of a scenario given as TOML text.
#[pyfunction]
#[pyo3(signature = (scenario_toml, seed=0))]
fn synthesize(scenario_toml: &str, seed: u64) -> PyResult<ChannelField> {
    let scenario: ChannelScenario =
        toml::from_str(scenario_toml).map_err(|e| PyValueError::new_err(e.to_string()))?;
    scenario.validate().map_err(err)?;
    let inner = core_synthesize(&scenario, seed).map_err(err)?;
    Ok(ChannelField { inner })
}

#[pymodule]
fn cost2100x(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(simulate_bsvr, m)?)?;
    m.add_function(wrap_pyfunction!(mle_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(mome, m)?)?;
    m.add_function(wrap_pyfunction!(crlb, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(acf_bs, m)?)?;
    m.add_function(wrap_pyfunction!(acf_circular, m)?)?;
    m.add_function(wrap_pyfunction!(acf_circular_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(chord_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gain, m)?)?;
    m.add_function(wrap_pyfunction!(sample_radius, m)?)?;
    m.add_function(wrap_pyfunction!(required_num_mpcs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_radius_weights, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lognormal_to_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(indoor_scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(outdoor_scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(twin_scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_class::<ChannelField>()?;
    Ok(())
}
