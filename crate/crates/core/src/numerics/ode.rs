//! Fixed-step 4th-order propagation for non-Hermitian generators.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Propagate `d|psi>/dt = -i H_eff(t) |psi>` from `t0` to `t1` with classic
/// RK4 at fixed step `dt` (the last step is shortened to land on `t1`).
///
/// `apply` writes `H_eff(t)|psi>` into its output slice. The norm is
/// non-increasing whenever the anti-Hermitian part of `H_eff` is
/// `-(i/2) sum L^dag L`.
pub fn evolve_nonunitary<F>(
    state: &[C64],
    mut apply: F,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    if t1 < t0 {
        return Err(Error::Domain(format!("need t1 >= t0, got [{t0}, {t1}]")));
    }
    let dim = state.len();
    let mut psi = state.to_vec();
    if t1 == t0 {
        return Ok(psi);
    }
    let n_steps = ((t1 - t0) / dt).ceil() as usize;
    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let minus_i = C64::new(0.0, -1.0);

    let mut t = t0;
    for step in 0..n_steps {
        let h = if step + 1 == n_steps { t1 - t } else { dt };
        // k1 = -i H(t) psi
        apply(t, &psi, &mut k1);
        for v in k1.iter_mut() {
            *v *= minus_i;
        }
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * h * k1[i];
        }
        apply(t + 0.5 * h, &tmp, &mut k2);
        for v in k2.iter_mut() {
            *v *= minus_i;
        }
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * h * k2[i];
        }
        apply(t + 0.5 * h, &tmp, &mut k3);
        for v in k3.iter_mut() {
            *v *= minus_i;
        }
        for i in 0..dim {
            tmp[i] = psi[i] + h * k3[i];
        }
        apply(t + h, &tmp, &mut k4);
        for v in k4.iter_mut() {
            *v *= minus_i;
        }
        let w = h / 6.0;
        for i in 0..dim {
            psi[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        t += h;
        if !psi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Instability(format!(
                "state became non-finite at t = {t:.6}"
            )));
        }
    }
    Ok(psi)
}
