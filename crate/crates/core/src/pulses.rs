//! N-photon input amplitude functions: Gaussian Fock pulses, separated
//! Gaussian wavepackets with partial indistinguishability, and
//! Hermite-Gauss two-photon superpositions.
//!
//! All amplitudes are expressed in the frame rotating at the atomic
//! transition; carrier phases enter only through the detuning field.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{hermite_poly, quad_1d, quad_simplex, QuadratureConfig};
use crate::GAMMA_G;

const SQRT_PI: f64 = 1.772453850905516;

/// Single-photon Gaussian amplitude
/// `h(t) = sqrt(2/(delta sqrt(pi))) exp(-i detuning t - 2 t^2 / delta^2)`.
pub fn gaussian_h(delta: f64, detuning: f64, t: f64) -> C64 {
    let amp = (2.0 / (delta * SQRT_PI)).sqrt() * (-2.0 * t * t / (delta * delta)).exp();
    amp * C64::new(0.0, -detuning * t).exp()
}

/// Frequency profile of [`gaussian_h`], with `omega` measured from the atomic
/// resonance: `h(omega) = sqrt(delta/(2 sqrt(pi))) exp(-(omega - detuning)^2 delta^2 / 8)`.
pub fn gaussian_h_freq(delta: f64, detuning: f64, omega: f64) -> C64 {
    let x = omega - detuning;
    C64::new(
        (delta / (2.0 * SQRT_PI)).sqrt() * (-x * x * delta * delta / 8.0).exp(),
        0.0,
    )
}

/// 1-D Hermite-Gauss function of width `delta`:
/// `h_n(t) = sqrt(1/(2^(n-1) n! sqrt(pi) delta)) exp(-2 t^2/delta^2) H_n(2 t/delta)`.
pub fn hermite_gauss(n: u32, delta: f64, t: f64) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (1.0 / (2f64.powi(n as i32 - 1) * fact * SQRT_PI * delta)).sqrt();
    norm * (-2.0 * t * t / (delta * delta)).exp() * hermite_poly(n, 2.0 * t / delta)
}

/// One single-photon temporal mode, evaluable in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WavePacket {
    Gaussian { delta: f64, detuning: f64, center: f64 },
    HermiteGauss { order: u32, delta: f64 },
}

impl WavePacket {
    pub fn eval(&self, t: f64) -> C64 {
        match *self {
            WavePacket::Gaussian { delta, detuning, center } => {
                gaussian_h(delta, detuning, t - center)
            }
            WavePacket::HermiteGauss { order, delta } => {
                C64::new(hermite_gauss(order, delta, t), 0.0)
            }
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            WavePacket::Gaussian { center, .. } => center,
            WavePacket::HermiteGauss { .. } => 0.0,
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            WavePacket::Gaussian { delta, .. } => delta,
            WavePacket::HermiteGauss { delta, .. } => delta,
        }
    }
}

/// `<a|b> = int conj(a(t)) b(t) dt` over the packets' support window.
pub fn overlap(a: &WavePacket, b: &WavePacket, cfg: &QuadratureConfig) -> Result<C64> {
    let lo = a.center().min(b.center());
    let hi = a.center().max(b.center());
    let margin = 8.0 * a.width().max(b.width());
    quad_1d(
        |t| a.eval(t).conj() * b.eval(t),
        lo - margin,
        hi + margin,
        cfg,
    )
}

/// Wavepacket overlap matrix S_ij; Hermitian with unit diagonal.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<C64>,
}

impl GramMatrix {
    pub fn from_wavepackets(packets: &[WavePacket], cfg: &QuadratureConfig) -> Result<Self> {
        let n = packets.len();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = C64::new(1.0, 0.0);
            for j in (i + 1)..n {
                let s = overlap(&packets[i], &packets[j], cfg)?;
                entries[i * n + j] = s;
                entries[j * n + i] = s.conj();
            }
        }
        Ok(Self { n, entries })
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Permanent by direct expansion over permutations (n <= 4 in practice).
    pub fn permanent(&self) -> C64 {
        let mut idx: Vec<usize> = (0..self.n).collect();
        let mut total = C64::new(0.0, 0.0);
        permute_sum(&mut idx, 0, &mut |perm| {
            let mut prod = C64::new(1.0, 0.0);
            for (i, &j) in perm.iter().enumerate() {
                prod *= self.entry(i, j);
            }
            total += prod;
        });
        total
    }
}

fn permute_sum<F: FnMut(&[usize])>(idx: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute_sum(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Normalization of a permutation-symmetrized product of wavepackets:
/// `1 / sqrt(permanent(S))` with S the Gram matrix.
pub fn gram_normalization(packets: &[WavePacket], cfg: &QuadratureConfig) -> Result<f64> {
    let gram = GramMatrix::from_wavepackets(packets, cfg)?;
    let perm = gram.permanent();
    if perm.re < 1e-12 || perm.im.abs() > 1e-9 * perm.re.max(1.0) {
        return Err(Error::IllConditioned(format!(
            "Gram permanent {perm} is numerically singular"
        )));
    }
    Ok(1.0 / perm.re.sqrt())
}

/// Sign selecting the symmetric (+) or antisymmetric-mode (-) Hermite-Gauss
/// two-photon superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseFamily {
    GaussianFock,
    SeparatedGaussians { separation: f64 },
    HermiteGaussPair { sign: PairSign },
}

/// Declarative description of an N-photon input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub family: PulseFamily,
    pub n_photons: usize,
    pub delta: f64,
    pub detuning: f64,
}

impl PulseSpec {
    pub fn gaussian_fock(n_photons: usize, delta: f64) -> Result<Self> {
        Self::new(PulseFamily::GaussianFock, n_photons, delta, 0.0)
    }

    pub fn separated_gaussians(delta: f64, separation: f64) -> Result<Self> {
        Self::new(
            PulseFamily::SeparatedGaussians { separation },
            2,
            delta,
            0.0,
        )
    }

    pub fn hermite_gauss_pair(delta: f64, sign: PairSign) -> Result<Self> {
        Self::new(PulseFamily::HermiteGaussPair { sign }, 2, delta, 0.0)
    }

    pub fn new(family: PulseFamily, n_photons: usize, delta: f64, detuning: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Config(format!("pulse width must be positive, got {delta}")));
        }
        if n_photons < 1 {
            return Err(Error::Config("photon number must be at least 1".into()));
        }
        match family {
            PulseFamily::HermiteGaussPair { .. } if n_photons != 2 => {
                return Err(Error::Config(
                    "the Hermite-Gauss pair is a two-photon state".into(),
                ))
            }
            PulseFamily::SeparatedGaussians { separation } if separation < 0.0 => {
                return Err(Error::Config(format!(
                    "separation must be non-negative, got {separation}"
                )))
            }
            _ => {}
        }
        Ok(Self { family, n_photons, delta, detuning })
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// Single-photon wavepackets making up the state, in arrival order.
    pub fn wavepackets(&self) -> Vec<WavePacket> {
        match self.family {
            PulseFamily::GaussianFock => vec![
                WavePacket::Gaussian {
                    delta: self.delta,
                    detuning: self.detuning,
                    center: 0.0,
                };
                self.n_photons
            ],
            PulseFamily::SeparatedGaussians { separation } => (1..=self.n_photons)
                .map(|i| WavePacket::Gaussian {
                    delta: self.delta,
                    detuning: self.detuning,
                    center: i as f64 * separation,
                })
                .collect(),
            PulseFamily::HermiteGaussPair { .. } => vec![
                WavePacket::HermiteGauss { order: 0, delta: self.delta },
                WavePacket::HermiteGauss { order: 1, delta: self.delta },
            ],
        }
    }

    /// Truncated support window: pulse centers extended by
    /// `max(8 delta, 8/gamma_g)` on both sides; Gaussian and exponential
    /// tails are below 1e-12 there.
    pub fn window(&self) -> (f64, f64) {
        let packets = self.wavepackets();
        let lo = packets.iter().map(|p| p.center()).fold(f64::INFINITY, f64::min);
        let hi = packets.iter().map(|p| p.center()).fold(f64::NEG_INFINITY, f64::max);
        let margin = (8.0 * self.delta).max(8.0 / GAMMA_G);
        (lo - margin, hi + margin)
    }
}

/// An N-photon amplitude in product-sum form
/// `g(t_1..t_N) = sum_m c_m prod_i f_mi(t_i)`, together with the measured
/// normalization `norm_factor` making the ordered-simplex integral of
/// `|norm_factor * g|^2` equal to one.
#[derive(Debug, Clone)]
pub struct AmplitudeFn {
    n_photons: usize,
    terms: Vec<(C64, Vec<WavePacket>)>,
    norm_factor: f64,
    window: (f64, f64),
}

impl AmplitudeFn {
    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn terms(&self) -> &[(C64, Vec<WavePacket>)] {
        &self.terms
    }

    /// Un-normalized amplitude at ordered times (defined for any times; the
    /// physical domain is t_1 <= ... <= t_N).
    pub fn eval(&self, times: &[f64]) -> C64 {
        debug_assert_eq!(times.len(), self.n_photons);
        let mut total = C64::new(0.0, 0.0);
        for (coeff, packets) in &self.terms {
            let mut prod = *coeff;
            for (p, &t) in packets.iter().zip(times) {
                prod *= p.eval(t);
            }
            total += prod;
        }
        total
    }
}

/// Build the amplitude function for a pulse description and measure its
/// normalization on the ordered simplex.
pub fn build_amplitude(spec: &PulseSpec) -> Result<AmplitudeFn> {
    build_amplitude_with(spec, &QuadratureConfig::new(1e-9, 1e-9, 4000)?)
}

pub fn build_amplitude_with(spec: &PulseSpec, cfg: &QuadratureConfig) -> Result<AmplitudeFn> {
    let n = spec.n_photons;
    if n > crate::numerics::MAX_SIMPLEX_DIM {
        return Err(Error::Unsupported(format!(
            "amplitude construction is limited to {} photons, got {n}",
            crate::numerics::MAX_SIMPLEX_DIM
        )));
    }
    let terms: Vec<(C64, Vec<WavePacket>)> = match spec.family {
        PulseFamily::GaussianFock => {
            // identical packets: the plain product is already symmetric
            vec![(C64::new(1.0, 0.0), spec.wavepackets())]
        }
        PulseFamily::SeparatedGaussians { .. } => {
            // symmetrized sum over all assignments of packets to time slots
            let packets = spec.wavepackets();
            let mut idx: Vec<usize> = (0..n).collect();
            let mut terms = Vec::new();
            permute_sum(&mut idx, 0, &mut |perm| {
                terms.push((
                    C64::new(1.0, 0.0),
                    perm.iter().map(|&j| packets[j]).collect(),
                ));
            });
            terms
        }
        PulseFamily::HermiteGaussPair { sign } => {
            let h0 = WavePacket::HermiteGauss { order: 0, delta: spec.delta };
            let h1 = WavePacket::HermiteGauss { order: 1, delta: spec.delta };
            let s = match sign {
                PairSign::Plus => 1.0,
                PairSign::Minus => -1.0,
            };
            vec![
                (C64::new(1.0, 0.0), vec![h0, h0]),
                (C64::new(s, 0.0), vec![h1, h1]),
            ]
        }
    };
    let window = spec.window();
    let probe = AmplitudeFn { n_photons: n, terms, norm_factor: 1.0, window };
    let norm = quad_simplex(
        |t| C64::new(probe.eval(t).norm_sqr(), 0.0),
        n,
        window,
        cfg,
    )?;
    if norm.re <= 0.0 {
        return Err(Error::IllConditioned(format!(
            "amplitude norm integral came out non-positive: {norm}"
        )));
    }
    Ok(AmplitudeFn { norm_factor: 1.0 / norm.re.sqrt(), ..probe })
}
