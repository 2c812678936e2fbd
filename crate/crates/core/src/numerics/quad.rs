//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands, with
//! infinite-interval substitutions and iterated quadrature over the ordered
//! simplex t_1 <= t_2 <= ... <= t_N.

use num_complex::Complex64 as C64;

use super::QuadratureConfig;
use crate::error::{Error, Result};

/// Largest number of ordered integration variables handled by [`quad_simplex`].
pub const MAX_SIMPLEX_DIM: usize = 4;

/// Tolerance tightening applied at each nesting level of the simplex rule.
const LEVEL_TIGHTEN: f64 = 0.1;

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule on the odd-indexed entries.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod evaluation on [a, b]: returns (kronrod estimate, error bound).
fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = C64::new(0.0, 0.0);
    let mut gauss = C64::new(0.0, 0.0);
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (flo, fhi);
        if x == 0.0 {
            flo = f(c);
            kron += wk * flo;
            gauss += WG[3] * flo;
        } else {
            flo = f(c - h * x);
            fhi = f(c + h * x);
            kron += wk * (flo + fhi);
            if j % 2 == 1 {
                gauss += WG[j / 2] * (flo + fhi);
            }
        }
    }
    kron *= h;
    gauss *= h;
    // conservative error bound: the raw |K15 - G7| difference
    (kron, (kron - gauss).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

fn adaptive_core<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<C64> {
    let (v0, e0) = gk15(f, a, b);
    let mut segs = vec![Segment { a, b, value: v0, err: e0 }];
    let mut subdivisions = 0usize;
    loop {
        let total: C64 = segs.iter().map(|s| s.value).sum();
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if total_err <= tol {
            return Ok(total);
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureConvergence {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        // split the segment with the largest error estimate
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|(_, s1), (_, s2)| s1.err.total_cmp(&s2.err))
            .expect("segment list is never empty");
        let Segment { a, b, .. } = segs.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval exhausted by floating point resolution
            let (v, _) = gk15(f, a, b);
            segs.push(Segment { a, b, value: v, err: 0.0 });
            continue;
        }
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        segs.push(Segment { a, b: m, value: v1, err: e1 });
        segs.push(Segment { a: m, b, value: v2, err: e2 });
        subdivisions += 1;
    }
}

/// Adaptive quadrature of a complex-valued function over [a, b].
///
/// Infinite endpoints are supported through the usual rational substitutions.
/// Returns an estimate whose error bound satisfies
/// `err <= max(abs_tol, rel_tol * |result|)`, or
/// [`Error::QuadratureConvergence`] carrying the best estimate.
pub fn quad_1d<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<C64> {
    match (a.is_infinite(), b.is_infinite()) {
        (false, false) => {
            if !(a < b) {
                return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
            }
            adaptive_core(&f, a, b, cfg)
        }
        (true, true) => {
            // x = t / (1 - t^2), t in (-1, 1)
            let g = |t: f64| {
                let den = 1.0 - t * t;
                let x = t / den;
                let jac = (1.0 + t * t) / (den * den);
                f(x) * jac
            };
            adaptive_core(&g, -1.0, 1.0, cfg)
        }
        (false, true) => {
            // x = a + t / (1 - t), t in [0, 1)
            let g = |t: f64| {
                let den = 1.0 - t;
                f(a + t / den) / (den * den)
            };
            adaptive_core(&g, 0.0, 1.0, cfg)
        }
        (true, false) => {
            // x = b - t / (1 - t), t in [0, 1)
            let g = |t: f64| {
                let den = 1.0 - t;
                f(b - t / den) / (den * den)
            };
            adaptive_core(&g, 0.0, 1.0, cfg)
        }
    }
}

/// Iterated adaptive quadrature over the ordered region
/// `window.0 <= t_1 <= t_2 <= ... <= t_n <= window.1`.
///
/// For a symmetric integrand this equals 1/n! times the full-hypercube
/// integral. Inner levels run with tolerances tightened by
/// [`LEVEL_TIGHTEN`] per level.
pub fn quad_simplex<F>(f: F, n: usize, window: (f64, f64), cfg: &QuadratureConfig) -> Result<C64>
where
    F: Fn(&[f64]) -> C64,
{
    if n == 0 || n > MAX_SIMPLEX_DIM {
        return Err(Error::UnsupportedDimension { n, max: MAX_SIMPLEX_DIM });
    }
    let (a, b) = window;
    let mut coords = vec![0.0_f64; n];
    nested_level(&f, n, n - 1, a, b, &mut coords, cfg)
}

fn nested_level<F>(
    f: &F,
    n: usize,
    level: usize,
    a: f64,
    b: f64,
    coords: &mut [f64],
    cfg: &QuadratureConfig,
) -> Result<C64>
where
    F: Fn(&[f64]) -> C64,
{
    // integrate t_{level+1} over [a, b]; inner variables live on [a, t]
    let inner_cfg = cfg.with_tolerance_factor(LEVEL_TIGHTEN);
    let cell = std::cell::RefCell::new((coords, None::<Error>));
    let result = quad_1d(
        |t| {
            let (coords, first_err) = &mut *cell.borrow_mut();
            coords[level] = t;
            if level == 0 {
                f(coords)
            } else {
                match nested_level(f, n, level - 1, a, t, coords, &inner_cfg) {
                    Ok(v) => v,
                    Err(e) => {
                        if first_err.is_none() {
                            *first_err = Some(e.clone());
                        }
                        match e {
                            Error::QuadratureConvergence { estimate, .. } => estimate,
                            _ => C64::new(f64::NAN, f64::NAN),
                        }
                    }
                }
            }
        },
        a,
        b,
        cfg,
    );
    let (_, first_err) = cell.into_inner();
    match first_err {
        Some(e) => Err(e),
        None => result,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::QuadratureConfig;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Independent oracle: adaptive Simpson with interval halving, seeded with
    /// 24 initial panels so narrow features cannot slip between probe points.
    fn simpson_oracle<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth > 48 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth + 1) + rec(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        let panels = 24;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = lo + h;
                rec(f, lo, hi, simpson(f, lo, hi), tol / panels as f64, 0)
            })
            .sum()
    }

    #[test]
    fn constant_on_unit_interval() {
        let v = quad_1d(|_| c(1.0), 0.0, 1.0, &cfg()).unwrap();
        assert!((v.re - 1.0).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn gaussian_over_the_real_line() {
        let v = quad_1d(|x| c((-x * x).exp()), f64::NEG_INFINITY, f64::INFINITY, &cfg()).unwrap();
        assert!((v.re - PI.sqrt()).abs() < 1e-10, "got {}", v.re);
    }

    #[test]
    fn lorentzian_weighted_gaussian_matches_simpson_oracle() {
        // value frozen from the adaptive Simpson oracle at tol 1e-12
        const FROZEN: f64 = 0.658649073735606;
        let d = 0.5;
        let f = move |w: f64| {
            w * w / (1.0 + w * w) * (d / (2.0 * PI.sqrt())) * (-w * w * d * d / 4.0).exp()
        };
        let oracle = simpson_oracle(&f, -60.0, 60.0, 1e-13);
        assert!((oracle - FROZEN).abs() < 1e-11, "oracle {oracle}");
        let v = quad_1d(move |w| c(f(w)), f64::NEG_INFINITY, f64::INFINITY, &cfg()).unwrap();
        assert!((v.re - FROZEN).abs() < 1e-10, "got {}", v.re);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = quad_1d(|x| c((-x).exp()), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert!((v.re - 1.0).abs() < 1e-10);
        let v = quad_1d(|x| c(x.exp()), f64::NEG_INFINITY, 0.0, &cfg()).unwrap();
        assert!((v.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // int_0^pi e^{i x} dx = 2i
        let v = quad_1d(|x| C64::new(0.0, x).exp(), 0.0, PI, &cfg()).unwrap();
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn convergence_failure_carries_best_estimate() {
        let tight = QuadratureConfig::new(1e-15, 0.0, 3).unwrap();
        let r = quad_1d(|x| c((x.abs() + 1e-12).sqrt().sin()), -4.0, 5.0, &tight);
        match r {
            Err(Error::QuadratureConvergence { estimate, error, .. }) => {
                assert!(estimate.norm() > 0.0 && error > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(quad_1d(|_| c(1.0), 1.0, 0.0, &cfg()).is_err());
    }

    #[test]
    fn simplex_volumes() {
        let v2 = quad_simplex(|_| c(1.0), 2, (0.0, 1.0), &cfg()).unwrap();
        assert!((v2.re - 0.5).abs() < 1e-10, "got {}", v2.re);
        let v3 = quad_simplex(|_| c(1.0), 3, (0.0, 1.0), &cfg()).unwrap();
        assert!((v3.re - 1.0 / 6.0).abs() < 1e-9, "got {}", v3.re);
    }

    #[test]
    fn simplex_of_product_gaussian_density() {
        // |h|^2 for the unit-width resonant Gaussian; ordered integral of the
        // 2-fold product is half the square of the 1-D integral.
        let h2 = |t: f64| 2.0 / PI.sqrt() * (-4.0 * t * t).exp();
        let one_d = simpson_oracle(&h2, -10.0, 10.0, 1e-13);
        let v = quad_simplex(|t| c(h2(t[0]) * h2(t[1])), 2, (-10.0, 10.0), &cfg()).unwrap();
        assert!((v.re - 0.5 * one_d * one_d).abs() < 1e-7, "{} vs {}", v.re, 0.5 * one_d * one_d);
        assert!((one_d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_symmetric_equals_hypercube_over_factorial() {
        let f = |t: &[f64]| c((t.iter().sum::<f64>()).cos());
        for n in 2..=3usize {
            let ordered = quad_simplex(f, n, (0.0, 1.5), &cfg()).unwrap();
            // hypercube by iterated full-range quadrature
            let full = match n {
                2 => quad_1d(
                    |x| quad_1d(|y| f(&[x, y]), 0.0, 1.5, &cfg()).unwrap(),
                    0.0,
                    1.5,
                    &cfg(),
                )
                .unwrap(),
                3 => quad_1d(
                    |x| {
                        quad_1d(
                            |y| quad_1d(|z| f(&[x, y, z]), 0.0, 1.5, &cfg()).unwrap(),
                            0.0,
                            1.5,
                            &cfg(),
                        )
                        .unwrap()
                    },
                    0.0,
                    1.5,
                    &cfg(),
                )
                .unwrap(),
                _ => unreachable!(),
            };
            let fact = (1..=n).product::<usize>() as f64;
            assert!(
                (ordered * fact - full).norm() < 1e-7,
                "n={n}: {} vs {}",
                ordered * fact,
                full
            );
        }
    }

    #[test]
    fn simplex_dimension_cap() {
        match quad_simplex(|_| c(1.0), 5, (0.0, 1.0), &cfg()) {
            Err(Error::UnsupportedDimension { n: 5, max }) => assert_eq!(max, MAX_SIMPLEX_DIM),
            other => panic!("expected dimension error, got {other:?}"),
        }
    }
}
