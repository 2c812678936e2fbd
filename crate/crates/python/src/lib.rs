//! Python bindings for the cascaded photon-subtractor simulator.
//!
//! Build with `cargo build --release -p pnr-python`; the produced cdylib
//! imports as the `pnr_sim` module (see python/smoke_test.py).

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pnr_core::linear::LinearConfig;
use pnr_core::pulses::PairSign;

fn err(e: pnr_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Declarative N-photon input state.
#[pyclass(name = "PulseSpec")]
#[derive(Clone)]
struct PyPulseSpec {
    inner: pnr_core::pulses::PulseSpec,
}

#[pymethods]
impl PyPulseSpec {
    /// N photons sharing one Gaussian temporal mode of width `delta`.
    #[staticmethod]
    fn gaussian_fock(n_photons: usize, delta: f64) -> PyResult<Self> {
        Ok(Self { inner: pnr_core::pulses::PulseSpec::gaussian_fock(n_photons, delta).map_err(err)? })
    }

    /// Two Gaussian wavepackets separated in time.
    #[staticmethod]
    fn separated_gaussians(delta: f64, separation: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pnr_core::pulses::PulseSpec::separated_gaussians(delta, separation)
                .map_err(err)?,
        })
    }

    /// Hermite-Gauss two-photon superposition; `minus` selects the
    /// anti-bunched sign.
    #[staticmethod]
    fn hermite_gauss_pair(delta: f64, minus: bool) -> PyResult<Self> {
        let sign = if minus { PairSign::Minus } else { PairSign::Plus };
        Ok(Self {
            inner: pnr_core::pulses::PulseSpec::hermite_gauss_pair(delta, sign).map_err(err)?,
        })
    }

    fn with_detuning(&self, detuning: f64) -> Self {
        Self { inner: self.inner.with_detuning(detuning) }
    }

    #[getter]
    fn n_photons(&self) -> usize {
        self.inner.n_photons
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Exact single-subtractor observables for one input pulse.
#[pyclass(name = "NonlinearModel")]
struct PyNonlinearModel {
    inner: pnr_core::nonlinear::NonlinearModel,
}

#[pymethods]
impl PyNonlinearModel {
    #[new]
    fn new(spec: PyPulseSpec) -> PyResult<Self> {
        Ok(Self { inner: pnr_core::nonlinear::NonlinearModel::new(&spec.inner).map_err(err)? })
    }

    /// Probability that outcome `j` occurs (0 = no photon subtracted).
    fn p_outcome(&self, j: usize) -> PyResult<f64> {
        self.inner.p_outcome(j).map_err(err)
    }

    /// Un-normalized outcome amplitude at ordered output times.
    fn output_amplitude(&self, j: usize, times: Vec<f64>) -> PyResult<C64> {
        self.inner.output_amplitude(j, &times).map_err(err)
    }

    /// Two-time correlator of the forward output.
    fn correlator_g2(&self, j: usize, t1: f64, t2: f64) -> PyResult<f64> {
        self.inner.correlator_g2(j, t1, t2).map_err(err)
    }

    /// Zero-delay second-order correlation of the forward output.
    fn g2_zero(&self, j: usize) -> PyResult<f64> {
        self.inner.g2_zero(j).map_err(err)
    }

    /// Both sides of the first/second-order coherence identity at `t`.
    fn g1_from_g2_check(&self, j: usize, t: f64) -> PyResult<(f64, f64)> {
        self.inner.g1_from_g2_check(j, t).map_err(err)
    }

    #[getter]
    fn norm_factor(&self) -> f64 {
        self.inner.norm_factor()
    }
}

/// Physicists' Hermite polynomial H_n(x).
#[pyfunction]
fn hermite_poly(n: u32, x: f64) -> f64 {
    pnr_core::numerics::hermite_poly(n, x)
}

/// Single-photon Gaussian amplitude h(t) in the rotating frame.
#[pyfunction]
#[pyo3(signature = (delta, t, detuning = 0.0))]
fn gaussian_h(delta: f64, t: f64, detuning: f64) -> C64 {
    pnr_core::pulses::gaussian_h(delta, detuning, t)
}

/// Frequency profile of the Gaussian wavepacket, omega measured from
/// resonance.
#[pyfunction]
#[pyo3(signature = (delta, omega, detuning = 0.0))]
fn gaussian_h_freq(delta: f64, omega: f64, detuning: f64) -> C64 {
    pnr_core::pulses::gaussian_h_freq(delta, detuning, omega)
}

/// Probability that one photon is subtracted by a cascade of `n_emitters`
/// fresh emitters (linear model).
#[pyfunction]
#[pyo3(signature = (n_emitters, delta_gamma, detuning = 0.0))]
fn p_subtract_single(n_emitters: usize, delta_gamma: f64, detuning: f64) -> PyResult<f64> {
    let cfg = LinearConfig::new(delta_gamma, n_emitters)
        .map_err(err)?
        .with_detuning(detuning);
    pnr_core::linear::p_subtract_single(n_emitters, &cfg).map_err(err)
}

/// Probability that exactly `k` of `n_photons` photons are subtracted by an
/// `n_emitters` cascade (linear model).
#[pyfunction]
fn p_subtract_k_of_n(
    n_photons: usize,
    k: usize,
    n_emitters: usize,
    delta_gamma: f64,
) -> PyResult<f64> {
    let cfg = LinearConfig::new(delta_gamma, n_emitters).map_err(err)?;
    pnr_core::linear::p_subtract_k_of_n(n_photons, k, &cfg).map_err(err)
}

/// Average photon-counting error of the linear-model detector.
#[pyfunction]
fn avg_error(n_photons: usize, n_emitters: usize, delta_gamma: f64) -> PyResult<f64> {
    let cfg = LinearConfig::new(delta_gamma, n_emitters).map_err(err)?;
    pnr_core::linear::avg_error(n_photons, &cfg).map_err(err)
}

/// Detector routing probabilities of a beamsplitter cascade.
#[pyfunction]
fn routing_probs(reflectivities: Vec<f64>) -> PyResult<Vec<f64>> {
    let cfg = pnr_core::conventional::SplitterConfig::new(reflectivities).map_err(err)?;
    Ok(pnr_core::conventional::routing_probs(&cfg))
}

/// Reflectivities of the balanced tree over `n` splitters.
#[pyfunction]
fn balanced_reflectivities(n: usize) -> Vec<f64> {
    pnr_core::conventional::SplitterConfig::balanced(n).reflectivities
}

/// Mean click count of the multinomial detector model.
#[pyfunction]
fn avg_clicks(probs: Vec<f64>, n_photons: usize) -> PyResult<f64> {
    pnr_core::conventional::avg_clicks(&probs, n_photons).map_err(err)
}

/// Best shared reflectivity and its click count.
#[pyfunction]
fn optimize_equal_reflectivity(n: usize, n_photons: usize) -> PyResult<(f64, f64)> {
    pnr_core::conventional::optimize_equal_reflectivity(n, n_photons).map_err(err)
}

/// Monte-Carlo response curve: (n_photons, mean_clicks, stderr) per input
/// photon number.
#[pyfunction]
fn response_curve(
    n_emitters: usize,
    delta_gamma: f64,
    photon_numbers: Vec<usize>,
    trajectories: usize,
    seed: u64,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let curve = pnr_core::trajectory::response_curve(
        n_emitters,
        delta_gamma,
        &photon_numbers,
        trajectories,
        seed,
    )
    .map_err(err)?;
    Ok(curve
        .points
        .into_iter()
        .map(|p| (p.n_photons, p.mean_clicks, p.stderr))
        .collect())
}

/// Monte-Carlo outcome estimates for a single-emitter subtractor:
/// (probabilities, standard errors), indexed by outcome j.
#[pyfunction]
fn trajectory_outcomes(
    spec: PyPulseSpec,
    trajectories: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let network = pnr_core::slh::full_network(&spec.inner, 1, pnr_core::GAMMA_G).map_err(err)?;
    let engine = pnr_core::trajectory::McwfEngine::new(&network).map_err(err)?;
    let records = engine.run_ensemble(trajectories, seed).map_err(err)?;
    let est = pnr_core::trajectory::estimate_outcomes(&records, 1, spec.inner.n_photons)
        .map_err(err)?;
    Ok((est.probabilities, est.stderr))
}

#[pymodule]
fn pnr_sim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPulseSpec>()?;
    m.add_class::<PyNonlinearModel>()?;
    m.add_function(wrap_pyfunction!(hermite_poly, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_h, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_h_freq, m)?)?;
    m.add_function(wrap_pyfunction!(p_subtract_single, m)?)?;
    m.add_function(wrap_pyfunction!(p_subtract_k_of_n, m)?)?;
    m.add_function(wrap_pyfunction!(avg_error, m)?)?;
    m.add_function(wrap_pyfunction!(routing_probs, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_reflectivities, m)?)?;
    m.add_function(wrap_pyfunction!(avg_clicks, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_equal_reflectivity, m)?)?;
    m.add_function(wrap_pyfunction!(response_curve, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_outcomes, m)?)?;
    Ok(())
}
