//! Exact single-subtractor observables in the nonlinear regime: output
//! amplitudes, outcome probabilities, two-time correlators, and zero-delay g2.
//!
//! Outcome amplitudes follow from the scattering elements by collapsing every
//! Dirac delta onto the output times and integrating the remaining input
//! times over their nested windows (t_i between consecutive output times).
//! Because every supported input family is a short sum of per-photon
//! products, each nested window integral reduces to the exponentially
//! weighted cumulative kernel
//!
//! `K_f(x) = int_{-inf}^x e^{gamma (t - x)} f(t) dt`,
//!
//! precomputed once per wavepacket on a dense grid. All exponentials stay
//! paired as `e^{-gamma (later - earlier)} <= 1`, so the evaluation is stable
//! at any coupling strength.
//!
//! Correlators use the symmetric extension `phi(t...) = norm * g'(sorted t...)`
//! with the measured input normalization; with that convention the
//! first/second-order identity `G1(t,t) = (1/(N-1)) int G2(t,t') dt'` holds
//! exactly and an undisturbed N-photon Fock pulse calibrates to
//! `g2(0) = 1 - 1/N`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{quad_1d, quad_simplex, QuadratureConfig, TimeGrid};
use crate::pulses::{build_amplitude, AmplitudeFn, PulseSpec, WavePacket};
use crate::scattering::ScatterElement;
use crate::GAMMA_G;

/// Nodes per unit of the shortest timescale in the cumulative kernels.
const KERNEL_RESOLUTION: f64 = 50.0;

/// 7-point Gauss-Legendre rule on [-1, 1].
const GL_X: [f64; 7] = [
    -0.949107912342759,
    -0.741531185599394,
    -0.405845151377397,
    0.0,
    0.405845151377397,
    0.741531185599394,
    0.949107912342759,
];
const GL_W: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gl7<F: Fn(f64) -> C64>(f: F, a: f64, b: f64) -> C64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = C64::new(0.0, 0.0);
    for (&x, &w) in GL_X.iter().zip(GL_W.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Exponentially weighted cumulative integral of one wavepacket.
#[derive(Debug, Clone)]
struct WeightedKernel {
    packet: WavePacket,
    t0: f64,
    t1: f64,
    step: f64,
    nodes: Vec<C64>,
}

impl WeightedKernel {
    fn build(packet: WavePacket, window: (f64, f64)) -> Self {
        let (t0, t1) = window;
        let scale = packet.width().min(1.0 / GAMMA_G);
        let n_panels = (((t1 - t0) / scale * KERNEL_RESOLUTION).ceil() as usize).max(64);
        let step = (t1 - t0) / n_panels as f64;
        let mut nodes = Vec::with_capacity(n_panels + 1);
        let mut k = C64::new(0.0, 0.0);
        nodes.push(k);
        for p in 0..n_panels {
            let lo = t0 + p as f64 * step;
            let hi = lo + step;
            k = k * (-GAMMA_G * step).exp()
                + gl7(|t| packet.eval(t) * (GAMMA_G * (t - hi)).exp(), lo, hi);
            nodes.push(k);
        }
        Self { packet, t0, t1, step, nodes }
    }

    /// `K(x) = int_{-inf}^x e^{gamma (t - x)} f(t) dt`.
    fn eval(&self, x: f64) -> C64 {
        if x <= self.t0 {
            // the packet carries no weight below the window
            return C64::new(0.0, 0.0);
        }
        if x >= self.t1 {
            return self.nodes[self.nodes.len() - 1] * (-GAMMA_G * (x - self.t1)).exp();
        }
        let idx = ((x - self.t0) / self.step) as usize;
        let lo = self.t0 + idx as f64 * self.step;
        let base = self.nodes[idx] * (-GAMMA_G * (x - lo)).exp();
        if x == lo {
            return base;
        }
        base + gl7(|t| self.packet.eval(t) * (GAMMA_G * (t - x)).exp(), lo, x)
    }

    /// `int_a^b e^{gamma (t - c)} f(t) dt` for `c >= b >= a`; `a = -inf` is
    /// encoded as `f64::NEG_INFINITY`.
    fn window_integral(&self, a: f64, b: f64, c: f64) -> C64 {
        if b <= a {
            return C64::new(0.0, 0.0);
        }
        let kb = self.eval(b);
        let tail = if a.is_infinite() {
            C64::new(0.0, 0.0)
        } else {
            self.eval(a) * (-GAMMA_G * (b - a)).exp()
        };
        (kb - tail) * (-GAMMA_G * (c - b)).exp()
    }
}

/// Precomputed nonlinear model of one photon subtractor driven by a given
/// input pulse.
pub struct NonlinearModel {
    spec: PulseSpec,
    amplitude: AmplitudeFn,
    elements: Vec<ScatterElement>,
    /// kernel index for each (product term, photon slot)
    kernel_of: Vec<Vec<usize>>,
    kernels: Vec<WeightedKernel>,
    window: (f64, f64),
}

impl NonlinearModel {
    pub fn new(spec: &PulseSpec) -> Result<Self> {
        let n = spec.n_photons;
        if n > 3 {
            return Err(Error::Unsupported(format!(
                "nonlinear observables are available for 1..=3 photons, got {n}"
            )));
        }
        let elements = (0..=n)
            .map(|j| ScatterElement::new(n, j))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(spec, elements)
    }

    /// Calibration hook: the same machinery with pass-through scattering,
    /// which reproduces the undisturbed input statistics.
    pub fn with_identity_scattering(spec: &PulseSpec) -> Result<Self> {
        let n = spec.n_photons;
        if n > 3 {
            return Err(Error::Unsupported(format!(
                "nonlinear observables are available for 1..=3 photons, got {n}"
            )));
        }
        let elements = (0..=n).map(|_| ScatterElement::identity(n)).collect();
        Self::assemble(spec, elements)
    }

    fn assemble(spec: &PulseSpec, elements: Vec<ScatterElement>) -> Result<Self> {
        let amplitude = build_amplitude(spec)?;
        let window = amplitude.window();
        let mut kernels: Vec<WeightedKernel> = Vec::new();
        let mut kernel_of = Vec::new();
        for (_, packets) in amplitude.terms() {
            let mut row = Vec::with_capacity(packets.len());
            for p in packets {
                let idx = match kernels.iter().position(|k| k.packet == *p) {
                    Some(i) => i,
                    None => {
                        kernels.push(WeightedKernel::build(*p, window));
                        kernels.len() - 1
                    }
                };
                row.push(idx);
            }
            kernel_of.push(row);
        }
        Ok(Self { spec: *spec, amplitude, elements, kernel_of, kernels, window })
    }

    pub fn spec(&self) -> &PulseSpec {
        &self.spec
    }

    pub fn n_photons(&self) -> usize {
        self.amplitude.n_photons()
    }

    pub fn norm_factor(&self) -> f64 {
        self.amplitude.norm_factor()
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Un-normalized outcome amplitude g'_{N,j} at ordered output times.
    pub fn output_amplitude(&self, j: usize, tp: &[f64]) -> Result<C64> {
        let n = self.n_photons();
        if j > n {
            return Err(Error::Domain(format!("outcome {j} out of range for {n} photons")));
        }
        if tp.len() != n {
            return Err(Error::Domain(format!("expected {n} output times")));
        }
        if tp.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("output times must be ordered".into()));
        }
        Ok(self.amplitude_unchecked(j, tp))
    }

    /// Core evaluation: for every kernel term, deltas substitute output times
    /// into input slots and each remaining input integrates over its nested
    /// window `[t'_{i-1}, t'_i]`. Output labels admit only the identity
    /// assignment on the interior of the ordered domain (any other
    /// permutation forces output times to coincide), so the permutation sum
    /// collapses to the term list itself.
    fn amplitude_unchecked(&self, j: usize, tp: &[f64]) -> C64 {
        let element = &self.elements[j];
        let mut total = C64::new(0.0, 0.0);
        for term in &element.terms {
            for (m, (coeff, packets)) in self.amplitude.terms().iter().enumerate() {
                let mut val = term.coefficient * coeff;
                for &(o, i) in &term.delta_pairs {
                    val *= packets[i].eval(tp[o]);
                }
                if val.norm_sqr() == 0.0 {
                    continue;
                }
                for &(i, o) in &term.exp_pairs {
                    let lo = if i == 0 { f64::NEG_INFINITY } else { tp[i - 1] };
                    let hi = tp[i];
                    val *= self.kernels[self.kernel_of[m][i]].window_integral(lo, hi, tp[o]);
                }
                total += val;
            }
        }
        total
    }

    /// Symmetric extension `phi` of the normalized outcome amplitude.
    fn phi(&self, j: usize, times: &mut [f64]) -> C64 {
        times.sort_by(f64::total_cmp);
        self.amplitude.norm_factor() * self.amplitude_unchecked(j, times)
    }

    /// Probability that outcome `j` occurs (j = 0: no photon subtracted,
    /// j >= 1: the j-th detected photon is the subtracted one):
    /// the ordered-domain integral of `|norm * g'_j|^2`.
    pub fn p_outcome(&self, j: usize) -> Result<f64> {
        let n = self.n_photons();
        if j > n {
            return Err(Error::Domain(format!("outcome {j} out of range for {n} photons")));
        }
        let nf = self.amplitude.norm_factor();
        let cfg = QuadratureConfig { abs_tol: 1e-7, rel_tol: 1e-6, max_subdivisions: 4000 };
        let v = quad_simplex(
            |tp| C64::new((nf * self.amplitude_unchecked(j, tp).norm()).powi(2), 0.0),
            n,
            self.window,
            &cfg,
        )?;
        Ok(v.re)
    }

    fn check_correlator_case(&self, j: usize) -> Result<()> {
        let n = self.n_photons();
        let ok = matches!((n, j), (2, 0) | (3, 0) | (3, 3));
        if !ok {
            return Err(Error::Domain(format!(
                "correlators cover (N, j) in {{(2,0), (3,0), (3,3)}}, got ({n}, {j})"
            )));
        }
        Ok(())
    }

    /// Two-time second-order correlator of the forward output,
    /// `G2(t1, t2) = (1/(N-2)!) int |phi(t1, t2, u...)|^2 du...`,
    /// on the symmetric domain.
    pub fn correlator_g2(&self, j: usize, t1: f64, t2: f64) -> Result<f64> {
        self.check_correlator_case(j)?;
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-5, max_subdivisions: 2000 };
        self.g2_value(j, t1, t2, &cfg)
    }

    fn g2_value(&self, j: usize, t1: f64, t2: f64, cfg: &QuadratureConfig) -> Result<f64> {
        match self.n_photons() {
            2 => {
                let mut ts = [t1, t2];
                Ok(self.phi(j, &mut ts).norm_sqr())
            }
            3 => {
                // integrate the third time over the full line, splitting at
                // the sort breakpoints
                let v = self.quad_full_line(
                    |u| {
                        let mut ts = [t1, t2, u];
                        C64::new(self.phi(j, &mut ts).norm_sqr(), 0.0)
                    },
                    &[t1, t2],
                    cfg,
                )?;
                Ok(v.re)
            }
            _ => unreachable!("correlator cases are restricted to N in {{2, 3}}"),
        }
    }

    /// Quadrature over the support window split at interior breakpoints
    /// (kinks of sorted-argument integrands).
    fn quad_full_line<F: Fn(f64) -> C64>(
        &self,
        f: F,
        breaks: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<C64> {
        let (lo, hi) = self.window;
        let mut cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = C64::new(0.0, 0.0);
        let mut a = lo;
        for &b in cuts.iter().chain(std::iter::once(&hi)) {
            if b > a {
                total += quad_1d(&f, a, b, cfg)?;
            }
            a = b;
        }
        Ok(total)
    }

    /// Zero-delay second-order correlation of the forward output:
    /// `g2(0) = (N-1)^2 int G2(t,t) dt / int |int G2(t,t') dt'|^2 dt`.
    pub fn g2_zero(&self, j: usize) -> Result<f64> {
        self.check_correlator_case(j)?;
        let n = self.n_photons();
        let outer = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-4, max_subdivisions: 2000 };
        let inner = outer.with_tolerance_factor(0.1);
        let numerator = self
            .quad_full_line(
                |t| C64::new(self.g2_value(j, t, t, &inner).unwrap_or(f64::NAN), 0.0),
                &[],
                &outer,
            )?
            .re;
        let denominator = self
            .quad_full_line(
                |t| {
                    let row = self
                        .quad_full_line(
                            |tp| {
                                C64::new(
                                    self.g2_value(j, t, tp, &inner.with_tolerance_factor(0.1))
                                        .unwrap_or(f64::NAN),
                                    0.0,
                                )
                            },
                            &[t],
                            &inner,
                        )
                        .map(|v| v.re)
                        .unwrap_or(f64::NAN);
                    C64::new(row * row, 0.0)
                },
                &[],
                &outer,
            )?
            .re;
        if !numerator.is_finite() || !denominator.is_finite() {
            return Err(Error::Instability("correlator quadrature failed".into()));
        }
        if denominator < 1e-30 {
            return Err(Error::Degenerate(format!(
                "correlator denominator {denominator:.3e} vanishes"
            )));
        }
        Ok((n as f64 - 1.0).powi(2) * numerator / denominator)
    }

    /// First-order coherence on the diagonal, computed directly from the
    /// amplitude: `G1(t,t) = (1/(N-1)!) int |phi(t, u...)|^2 du...`.
    pub fn g1_diag(&self, j: usize, t: f64) -> Result<f64> {
        let n = self.n_photons();
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-5, max_subdivisions: 2000 };
        match n {
            2 => {
                let v = self.quad_full_line(
                    |u| {
                        let mut ts = [t, u];
                        C64::new(self.phi(j, &mut ts).norm_sqr(), 0.0)
                    },
                    &[t],
                    &cfg,
                )?;
                Ok(v.re)
            }
            3 => {
                // (1/2) * full-plane integral = ordered integral over u <= v
                let inner_cfg = cfg.with_tolerance_factor(0.1);
                let v = self.quad_full_line(
                    |v_hi| {
                        let (lo, _) = self.window;
                        let mut cuts: Vec<f64> = vec![t].into_iter().filter(|&b| b < v_hi).collect();
                        cuts.retain(|&b| b > lo);
                        cuts.sort_by(f64::total_cmp);
                        let mut acc = C64::new(0.0, 0.0);
                        let mut a = lo;
                        for &b in cuts.iter().chain(std::iter::once(&v_hi)) {
                            if b > a {
                                acc += quad_1d(
                                    |u| {
                                        let mut ts = [t, u, v_hi];
                                        C64::new(self.phi(j, &mut ts).norm_sqr(), 0.0)
                                    },
                                    a,
                                    b,
                                    &inner_cfg,
                                )
                                .unwrap_or(C64::new(f64::NAN, 0.0));
                            }
                            a = b;
                        }
                        acc
                    },
                    &[t],
                    &cfg,
                )?;
                if !v.re.is_finite() {
                    return Err(Error::Instability("coherence quadrature failed".into()));
                }
                Ok(v.re)
            }
            _ => Err(Error::Unsupported(format!(
                "first-order coherence needs 2 or 3 photons, got {n}"
            ))),
        }
    }

    /// Both sides of the first/second-order correlation identity at time `t`:
    /// `(G1(t,t), (1/(N-1)) int G2(t,t') dt')`.
    pub fn g1_from_g2_check(&self, j: usize, t: f64) -> Result<(f64, f64)> {
        self.check_correlator_case(j)?;
        let n = self.n_photons();
        let lhs = self.g1_diag(j, t)?;
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-5, max_subdivisions: 2000 };
        let inner = cfg.with_tolerance_factor(0.1);
        let rhs = self
            .quad_full_line(
                |tp| C64::new(self.g2_value(j, t, tp, &inner).unwrap_or(f64::NAN), 0.0),
                &[t],
                &cfg,
            )?
            .re
            / (n as f64 - 1.0);
        if !rhs.is_finite() {
            return Err(Error::Instability("correlator quadrature failed".into()));
        }
        Ok((lhs, rhs))
    }

    /// Sampled correlator surface on a caller-specified grid.
    pub fn correlator_grid(&self, j: usize, grid: &TimeGrid) -> Result<Vec<Vec<f64>>> {
        self.check_correlator_case(j)?;
        let cfg = QuadratureConfig { abs_tol: 1e-8, rel_tol: 1e-4, max_subdivisions: 2000 };
        let times: Vec<f64> = grid.times().collect();
        let mut rows = Vec::with_capacity(times.len());
        for &t1 in &times {
            let mut row = Vec::with_capacity(times.len());
            for &t2 in &times {
                row.push(self.g2_value(j, t1, t2, &cfg)?);
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Convenience wrapper constructing the model per call.
pub fn p_outcome(spec: &PulseSpec, j: usize) -> Result<f64> {
    NonlinearModel::new(spec)?.p_outcome(j)
}
