//! Frequency-domain linear-regime model of the emitter cascade: single-photon
//! subtraction probability through a chain of emitters, k-of-N subtraction
//! statistics, and the average photon-counting error.
//!
//! The linear model treats N-photon transport as independent single-photon
//! events; each passage through an emitter reshapes the pulse by the Keep
//! response, which lowers the absorption likelihood at emitters downstream.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{quad_1d, QuadratureConfig};
use crate::pulses::gaussian_h_freq;
use crate::scattering::{sigma1_freq, PortKind};

/// Cascade parameters for the linear model. `delta_gamma` is the pulse width
/// in units of 1/gamma_g, `detuning` the carrier offset from resonance in
/// units of gamma_g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub delta_gamma: f64,
    pub detuning: f64,
    pub n_emitters: usize,
}

impl LinearConfig {
    pub fn new(delta_gamma: f64, n_emitters: usize) -> Result<Self> {
        if !(delta_gamma > 0.0) {
            return Err(Error::Config(format!(
                "delta_gamma must be positive, got {delta_gamma}"
            )));
        }
        Ok(Self { delta_gamma, detuning: 0.0, n_emitters })
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }
}

fn quad_cfg() -> QuadratureConfig {
    QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 4000 }
}

/// Probability that a single photon is subtracted somewhere along a cascade
/// of `lambda` fresh emitters:
/// `P_{1,1}^lambda = 1 - int |Keep(omega)^lambda h(omega)|^2 d omega`.
pub fn p_subtract_single(lambda: usize, cfg: &LinearConfig) -> Result<f64> {
    if lambda == 0 {
        return Ok(0.0);
    }
    let delta = cfg.delta_gamma;
    let det = cfg.detuning;
    // the Gaussian frequency profile confines the support; the Lorentzian
    // factors only suppress further
    let half_width = 16.0 / delta;
    let passed = quad_1d(
        |w| {
            let keep = sigma1_freq(PortKind::Keep, w).norm_sqr().powi(lambda as i32);
            C64::new(keep * gaussian_h_freq(delta, det, w).norm_sqr(), 0.0)
        },
        det - half_width,
        det + half_width,
        &quad_cfg(),
    )?;
    Ok((1.0 - passed.re).clamp(0.0, 1.0))
}

/// All multisets of `size` elements drawn from `{0, ..., max_value}`, each
/// exactly once, as non-decreasing sequences.
pub fn enumerate_multisets(size: usize, max_value: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, size: usize, lo: usize, hi: usize) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for v in lo..=hi {
            current.push(v);
            rec(out, current, size, v, hi);
            current.pop();
        }
    }
    rec(&mut out, &mut current, size, 0, max_value);
    out
}

/// Neumaier compensated summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Probability that exactly `k` of `N` photons are subtracted by an
/// `n`-emitter cascade. Each successful subtraction retires one emitter;
/// a surviving photon that passed after `b` subtractions had `n - b` fresh
/// emitters available.
pub fn p_subtract_k_of_n(n_photons: usize, k: usize, cfg: &LinearConfig) -> Result<f64> {
    let n = cfg.n_emitters;
    if n_photons == 0 || k > n_photons.min(n) {
        return Err(Error::Domain(format!(
            "invalid combination: N = {n_photons}, k = {k}, n = {n}"
        )));
    }
    let p: Vec<f64> = (0..=n)
        .map(|lam| p_subtract_single(lam, cfg))
        .collect::<Result<_>>()?;
    if k == 0 {
        return Ok((1.0 - p[n]).powi(n_photons as i32));
    }
    let lead: f64 = (0..k).map(|m| p[n - m]).product();
    let sum = compensated_sum(
        enumerate_multisets(n_photons - k, k)
            .into_iter()
            .map(|b| b.iter().map(|&m| 1.0 - p[n - m]).product::<f64>()),
    );
    Ok(lead * sum)
}

/// Average photon-count error of the detector:
/// `<error> = sum_{k=0}^{min(n, N-2)} (k + 1 - N) P_{N,k}^n`, never positive
/// (the last detector registers at most one click, so the count can only
/// fall short).
pub fn avg_error(n_photons: usize, cfg: &LinearConfig) -> Result<f64> {
    if n_photons == 0 {
        return Err(Error::Domain("photon number must be at least 1".into()));
    }
    if n_photons < 2 {
        return Ok(0.0);
    }
    let upper = cfg.n_emitters.min(n_photons - 2);
    let mut total = 0.0;
    for k in 0..=upper {
        total += (k as f64 + 1.0 - n_photons as f64) * p_subtract_k_of_n(n_photons, k, cfg)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    // frozen from the independent quadrature + path-enumeration oracle
    const P11_DG05: f64 = 0.341350926264394;
    const AVG_ERROR_N4: [(usize, [f64; 5]); 3] = [
        (3, [-1.489801708468, -0.441673869134, -0.096998525339, -0.005764342867, -0.000000007713]),
        (4, [-2.323880907606, -0.852861866529, -0.246911253208, -0.024654140387, -0.000001101415]),
        (5, [-3.164931104209, -1.377148900718, -0.548423270999, -0.113349984281, -0.000378775973]),
    ];
    const SWEEP: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

    #[test]
    fn empty_cascade_never_subtracts() {
        let cfg = LinearConfig::new(0.7, 0).unwrap();
        assert_eq!(p_subtract_single(0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn monochromatic_limit_subtracts_deterministically() {
        let cfg = LinearConfig::new(100.0, 1).unwrap();
        let p = p_subtract_single(1, &cfg).unwrap();
        assert!(p > 0.999, "p = {p}");
    }

    #[test]
    fn single_emitter_frozen_value() {
        let cfg = LinearConfig::new(0.5, 1).unwrap();
        let p = p_subtract_single(1, &cfg).unwrap();
        assert!((p - P11_DG05).abs() < 1e-10, "p = {p}");
    }

    #[test]
    fn probabilities_stay_in_range() {
        for dg in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let cfg = LinearConfig::new(dg, 4).unwrap();
            for lam in 0..=4 {
                let p = p_subtract_single(lam, &cfg).unwrap();
                assert!((0.0..=1.0).contains(&p), "dg={dg} lam={lam}: {p}");
            }
        }
    }

    #[test]
    fn two_photons_one_subtraction_two_emitters() {
        // P_{1,1}^2 [(1 - P_{1,1}^2) + (1 - P_{1,1}^1)]
        let cfg = LinearConfig::new(0.8, 2).unwrap();
        let p1 = p_subtract_single(1, &cfg).unwrap();
        let p2 = p_subtract_single(2, &cfg).unwrap();
        let want = p2 * ((1.0 - p2) + (1.0 - p1));
        let got = p_subtract_k_of_n(2, 1, &cfg).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn single_photon_reduces_to_single_subtraction() {
        let cfg = LinearConfig::new(0.6, 1).unwrap();
        let got = p_subtract_k_of_n(1, 1, &cfg).unwrap();
        let want = p_subtract_single(1, &cfg).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    /// Independent oracle: enumerate all 2^N subtract/survive sequences with
    /// chained probabilities.
    fn path_enumeration(n_photons: usize, k: usize, p: &[f64]) -> f64 {
        let mut total = 0.0;
        for bits in 0..(1u32 << n_photons) {
            let mut active = p.len() - 1;
            let mut prob = 1.0;
            let mut subtracted = 0;
            for i in 0..n_photons {
                if bits >> i & 1 == 1 {
                    if active == 0 {
                        prob = 0.0;
                        break;
                    }
                    prob *= p[active];
                    active -= 1;
                    subtracted += 1;
                } else {
                    prob *= 1.0 - p[active];
                }
            }
            if subtracted == k {
                total += prob;
            }
        }
        total
    }

    #[test]
    fn multiset_sum_matches_path_enumeration() {
        for (dg, n, n_photons) in [(0.5, 2, 3), (1.0, 4, 5), (2.0, 3, 2)] {
            let cfg = LinearConfig::new(dg, n).unwrap();
            let p: Vec<f64> = (0..=n).map(|l| p_subtract_single(l, &cfg).unwrap()).collect();
            for k in 0..=n_photons.min(n) {
                let got = p_subtract_k_of_n(n_photons, k, &cfg).unwrap();
                let want = path_enumeration(n_photons, k, &p);
                assert!(
                    (got - want).abs() < 1e-12,
                    "dg={dg} n={n} N={n_photons} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn outcomes_are_complete_when_emitters_outnumber_photons() {
        for dg in [0.3, 1.0, 4.0] {
            let cfg = LinearConfig::new(dg, 4).unwrap();
            for n_photons in 1..=4usize {
                let total: f64 = (0..=n_photons)
                    .map(|k| p_subtract_k_of_n(n_photons, k, &cfg).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-8, "dg={dg} N={n_photons}: {total}");
            }
        }
    }

    #[test]
    fn single_photon_error_vanishes() {
        let cfg = LinearConfig::new(0.5, 4).unwrap();
        assert_eq!(avg_error(1, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn two_photon_error_is_single_failure_term() {
        let cfg = LinearConfig::new(0.9, 3).unwrap();
        let p3 = p_subtract_single(3, &cfg).unwrap();
        let want = -(1.0 - p3) * (1.0 - p3);
        let got = avg_error(2, &cfg).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn error_is_never_positive() {
        for dg in [0.1, 1.0, 10.0] {
            for n in 1..=5usize {
                let cfg = LinearConfig::new(dg, n).unwrap();
                for n_photons in 1..=6usize {
                    let e = avg_error(n_photons, &cfg).unwrap();
                    assert!(e <= 1e-15, "dg={dg} n={n} N={n_photons}: {e}");
                }
            }
        }
    }

    #[test]
    fn four_emitter_error_table() {
        // five-point sweep frozen from the independent oracle pipeline
        for (n_photons, row) in AVG_ERROR_N4 {
            for (dg, want) in SWEEP.iter().zip(row) {
                let cfg = LinearConfig::new(*dg, 4).unwrap();
                let got = avg_error(n_photons, &cfg).unwrap();
                assert!(
                    (got - want).abs() < 1e-8,
                    "N={n_photons} dg={dg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn error_shrinks_from_center_to_strong_coupling() {
        for (n_photons, row) in AVG_ERROR_N4 {
            let at = |dg: f64| row[SWEEP.iter().position(|&x| x == dg).unwrap()];
            assert!(
                at(10.0).abs() < at(1.0).abs(),
                "N={n_photons}: |err(10)| vs |err(1)|"
            );
        }
    }

    #[test]
    fn multiset_enumeration_counts() {
        assert_eq!(enumerate_multisets(0, 3), vec![Vec::<usize>::new()]);
        assert_eq!(enumerate_multisets(1, 1), vec![vec![0], vec![1]]);
        // C(2 + 2, 2) = 6
        let sets = enumerate_multisets(2, 2);
        assert_eq!(sets.len(), 6);
        let unique: std::collections::HashSet<_> = sets.iter().cloned().collect();
        assert_eq!(unique.len(), sets.len());
    }

    #[test]
    fn invalid_combinations_rejected() {
        let cfg = LinearConfig::new(1.0, 2).unwrap();
        assert!(p_subtract_k_of_n(2, 3, &cfg).is_err());
        assert!(p_subtract_k_of_n(0, 0, &cfg).is_err());
        assert!(LinearConfig::new(0.0, 2).is_err());
    }
}
