//! Exact time-domain scattering elements of a single photon subtractor.
//!
//! An N-photon element is stored as a list of [`KernelTerm`]s: Dirac-delta
//! factors identifying output times with input times, times a smooth
//! exponential kernel. Deltas are never evaluated numerically; consumers
//! collapse them analytically when building integrands (each delta removes
//! one integration variable).
//!
//! Elements are defined on the interleaved ordering
//! `t_1 <= t'_1 <= t_2 <= t'_2 <= ... <= t_N <= t'_N`
//! (exactly one output photon between consecutive input photons) and vanish
//! outside it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::GAMMA_G;

/// Which output port a photon takes at a single-photon element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortKind {
    /// Photon re-routed to the subtraction port; the emitter flips to its
    /// second ground state.
    Subtract,
    /// Photon leaves through the forward port; the emitter returns to (or
    /// never leaves) its first ground state.
    Keep,
}

/// Final emitter state selecting which Green's function applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitterFinal {
    /// All interacting photons re-emitted forward; emitter back in |1>.
    State1,
    /// Last interacting photon diverted; emitter left in |2>.
    State2,
}

/// Single-photon element split into its delta part and smooth part:
/// subtract -> (0, -gamma e^{-gamma dt}); keep -> (1 at dt = 0, -gamma e^{-gamma dt}).
pub fn sigma1(kind: PortKind, dt: f64) -> Result<(f64, C64)> {
    if dt < 0.0 {
        return Err(Error::Domain(format!(
            "single-photon kernel needs t' - t >= 0, got {dt}"
        )));
    }
    let smooth = C64::new(-GAMMA_G * (-GAMMA_G * dt).exp(), 0.0);
    let delta_weight = match kind {
        PortKind::Subtract => 0.0,
        PortKind::Keep => {
            if dt == 0.0 {
                1.0
            } else {
                0.0
            }
        }
    };
    Ok((delta_weight, smooth))
}

/// Lorentzian frequency response of the single-photon element, with `omega`
/// measured from the atomic resonance:
/// subtract -> -gamma/(gamma + i omega); keep -> i omega/(gamma + i omega).
pub fn sigma1_freq(kind: PortKind, omega: f64) -> C64 {
    let den = C64::new(GAMMA_G, omega);
    match kind {
        PortKind::Subtract => C64::new(-GAMMA_G, 0.0) / den,
        PortKind::Keep => C64::new(0.0, omega) / den,
    }
}

fn sorted(ts: &[f64]) -> bool {
    ts.windows(2).all(|w| w[0] <= w[1])
}

fn interleaved(t: &[f64], tp: &[f64]) -> bool {
    // t_1 <= t'_1 <= t_2 <= t'_2 <= ... <= t_N <= t'_N
    t.iter().zip(tp).all(|(a, b)| a <= b)
        && tp.iter().zip(t.iter().skip(1)).all(|(b, a)| b <= a)
}

/// Rotating-frame Green's function for `k` interacting photons:
/// `gamma^k exp(gamma sum_i (t_i - t'_i))` on the interleaved domain, zero
/// outside. `EmitterFinal` selects between the flipped and unflipped element;
/// on resonance both carry the same value.
pub fn green_fn(k: usize, _final_state: EmitterFinal, t: &[f64], tp: &[f64]) -> Result<C64> {
    if t.len() != k || tp.len() != k {
        return Err(Error::Domain(format!(
            "expected {k} input and output times, got {} and {}",
            t.len(),
            tp.len()
        )));
    }
    if !sorted(t) || !sorted(tp) {
        return Err(Error::Domain("time arrays must be sorted".into()));
    }
    if !interleaved(t, tp) {
        return Ok(C64::new(0.0, 0.0));
    }
    let exponent: f64 = t.iter().zip(tp).map(|(a, b)| a - b).sum();
    Ok(C64::new(GAMMA_G.powi(k as i32) * (GAMMA_G * exponent).exp(), 0.0))
}

/// One primitive term of a scattering element:
/// `coefficient * prod_{(o,i) in delta_pairs} delta(t'_o - t_i)
///  * exp(exp_rate * sum_{(i,o) in exp_pairs} (t_i - t'_o))`.
///
/// Indices are zero-based photon positions. Every input index and every
/// output index appears in exactly one delta pair or exp pair.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerm {
    pub coefficient: C64,
    /// (output index, input index) pairs identified by Dirac deltas.
    pub delta_pairs: Vec<(usize, usize)>,
    /// Decay rate multiplying the summed time differences (gamma_g).
    pub exp_rate: f64,
    /// (input index entering with +, output index entering with -) pairs.
    pub exp_pairs: Vec<(usize, usize)>,
}

impl KernelTerm {
    /// Smooth factor of the term at the given times, deltas excluded. Callers
    /// must have used the delta pairs to identify coordinates already.
    pub fn smooth_value(&self, t: &[f64], tp: &[f64]) -> C64 {
        let exponent: f64 = self.exp_pairs.iter().map(|&(i, o)| t[i] - tp[o]).sum();
        self.coefficient * (self.exp_rate * exponent).exp()
    }

    /// Canonical key for grouping terms with the same delta structure.
    fn delta_signature(&self) -> Vec<(usize, usize)> {
        let mut sig = self.delta_pairs.clone();
        sig.sort_unstable();
        sig
    }
}

/// A distributional N-photon scattering amplitude for outcome `subtracted`
/// (0 = no photon subtracted, j >= 1 = the photon detected j-th at the
/// subtraction port).
#[derive(Debug, Clone)]
pub struct ScatterElement {
    pub n_photons: usize,
    pub subtracted: usize,
    pub terms: Vec<KernelTerm>,
}

impl ScatterElement {
    pub fn new(n_photons: usize, subtracted: usize) -> Result<Self> {
        Ok(Self {
            n_photons,
            subtracted,
            terms: mpk_expand(n_photons, subtracted)?,
        })
    }

    /// Pass-through element (every photon keeps its time and port). Used as a
    /// calibration hook by correlator tests.
    pub fn identity(n_photons: usize) -> Self {
        Self {
            n_photons,
            subtracted: 0,
            terms: vec![KernelTerm {
                coefficient: C64::new(1.0, 0.0),
                delta_pairs: (0..n_photons).map(|i| (i, i)).collect(),
                exp_rate: GAMMA_G,
                exp_pairs: Vec::new(),
            }],
        }
    }

    /// Group the primitive terms by delta structure and sum their smooth
    /// factors at the given times.
    pub fn smooth_by_signature(
        &self,
        t: &[f64],
        tp: &[f64],
    ) -> Vec<(Vec<(usize, usize)>, C64)> {
        let mut groups: Vec<(Vec<(usize, usize)>, C64)> = Vec::new();
        for term in &self.terms {
            let sig = term.delta_signature();
            let v = term.smooth_value(t, tp);
            match groups.iter_mut().find(|(s, _)| *s == sig) {
                Some((_, acc)) => *acc += v,
                None => groups.push((sig, v)),
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        groups
    }
}

/// Ordered compositions of `total` into positive parts.
fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first) {
            let mut c = Vec::with_capacity(rest.len() + 1);
            c.push(first);
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

/// Expand the N-photon element for outcome `j` into primitive kernel terms.
///
/// The expansion runs over ordered compositions of the interacting-photon
/// count (j, or N when j = 0) into saturation blocks. A singleton block is a
/// single-photon element (subtract kind exactly for the block holding the
/// subtracted photon); a block of m > 1 photons contributes
/// `-gamma * prod_{k=1}^{m-1} delta(t_{q+k} - t'_{q+k-1}) * exp(gamma (t_q - t'_{q+m-1}))`
/// for photons q..q+m-1. Photons after the subtracted one pass through with
/// identity deltas. The single-block trivial composition reproduces the
/// leading product of single-photon elements.
pub fn mpk_expand(n: usize, j: usize) -> Result<Vec<KernelTerm>> {
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!(
            "scattering elements are expanded for 1..=3 photons, got {n}"
        )));
    }
    if j > n {
        return Err(Error::Domain(format!(
            "subtracted index {j} out of range for {n} photons"
        )));
    }
    // photons taking part in the interaction chain; the rest pass through
    let interacting = if j == 0 { n } else { j };
    let mut terms = Vec::new();
    for comp in compositions(interacting) {
        // factors for each block: a list of alternative (coeff, deltas, exps)
        let mut branches: Vec<KernelTerm> = vec![KernelTerm {
            coefficient: C64::new(1.0, 0.0),
            delta_pairs: (interacting..n).map(|i| (i, i)).collect(),
            exp_rate: GAMMA_G,
            exp_pairs: Vec::new(),
        }];
        let mut q = 0usize; // first photon of the current block
        for &m in &comp {
            let mut next = Vec::new();
            for base in &branches {
                if m == 1 {
                    let is_subtracted = j >= 1 && q == j - 1;
                    if !is_subtracted {
                        // keep: delta branch
                        let mut t = base.clone();
                        t.delta_pairs.push((q, q));
                        next.push(t);
                    }
                    // smooth branch (same shape for keep and subtract)
                    let mut t = base.clone();
                    t.coefficient *= C64::new(-GAMMA_G, 0.0);
                    t.exp_pairs.push((q, q));
                    next.push(t);
                } else {
                    let mut t = base.clone();
                    t.coefficient *= C64::new(-GAMMA_G, 0.0);
                    for k in 1..m {
                        t.delta_pairs.push((q + k - 1, q + k));
                    }
                    t.exp_pairs.push((q, q + m - 1));
                    next.push(t);
                }
            }
            branches = next;
            q += m;
        }
        terms.append(&mut branches);
    }
    Ok(terms)
}

/// Smooth-sector value of an element at generic (delta-free) time tuples:
/// the sum over delta-free terms. Zero when the interleaving constraint is
/// violated; a request exactly on a delta support is a misuse (the caller
/// should have collapsed that delta analytically).
pub fn eval_element(elem: &ScatterElement, t: &[f64], tp: &[f64]) -> Result<C64> {
    if t.len() != elem.n_photons || tp.len() != elem.n_photons {
        return Err(Error::Domain(format!(
            "expected {} input and output times",
            elem.n_photons
        )));
    }
    if !sorted(t) || !sorted(tp) {
        return Err(Error::Domain("time arrays must be sorted".into()));
    }
    if !interleaved(t, tp) {
        return Ok(C64::new(0.0, 0.0));
    }
    for term in &elem.terms {
        for &(o, i) in &term.delta_pairs {
            if t[i] == tp[o] {
                return Err(Error::Misuse(format!(
                    "evaluation on the support of delta(t'_{o} - t_{i}); collapse it first"
                )));
            }
        }
    }
    Ok(elem
        .terms
        .iter()
        .filter(|term| term.delta_pairs.is_empty())
        .map(|term| term.smooth_value(t, tp))
        .sum())
}
