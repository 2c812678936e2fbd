//! Monte-Carlo wavefunction engine over the composed network: seeded
//! trajectory realizations, jump records, click statistics, outcome and
//! correlation estimators, and detector response curves.
//!
//! Jumps use the waiting-time method: the state evolves under
//! `H_eff = H - (i/2) sum_k L_k^dag L_k` until its squared norm crosses a
//! pre-drawn uniform threshold; the crossing is located by bisection with
//! re-propagation, the jump channel drawn proportional to `||L_k psi||^2`.
//!
//! Between jumps the engine propagates only the structurally reachable part
//! of the state: the support of the wavefunction is closed under the sparsity
//! pattern of `H_eff` once per segment, and every operator is restricted to
//! that subspace. Omitted amplitudes are exactly zero, so results are
//! identical to propagating the full vector.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{RngStream, TimeGrid};
use crate::operators::SparseOp;
use crate::slh::{Envelope, Network};

/// Largest tolerated relative norm-squared drop across one step.
const MAX_NORM_DROP: f64 = 0.1;

/// Bisection resolution: dt / 2^6 = dt / 64.
const BISECT_ITERS: u32 = 6;

/// One detection event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    /// 1-based: channels 1..n are subtraction ports, n+1 the forward port.
    pub channel: usize,
}

/// Seeded stochastic evolution output.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub jumps: Vec<JumpEvent>,
    pub final_state: Vec<C64>,
    /// Squared conditional norm sampled at every grid point; non-increasing
    /// between jumps and reset to 1 by each collapse.
    pub survival_trace: Vec<f64>,
}

/// Per-trajectory click pattern and inferred photon count.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickSummary {
    pub subtraction_clicks: Vec<usize>,
    pub final_detector_click: bool,
    pub inferred_count: usize,
    pub true_count: usize,
    pub error: i64,
}

impl ClickSummary {
    pub fn from_record(record: &TrajectoryRecord, n_emitters: usize, true_count: usize) -> Self {
        let mut fired = vec![false; n_emitters];
        let mut final_click = false;
        for jump in &record.jumps {
            if jump.channel == n_emitters + 1 {
                final_click = true;
            } else {
                fired[jump.channel - 1] = true;
            }
        }
        let subtraction_clicks: Vec<usize> = (1..=n_emitters).filter(|&c| fired[c - 1]).collect();
        let inferred_count = subtraction_clicks.len() + usize::from(final_click);
        ClickSummary {
            final_detector_click: final_click,
            inferred_count,
            true_count,
            error: inferred_count as i64 - true_count as i64,
            subtraction_clicks,
        }
    }
}

/// Mean click count versus input photon number.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    pub points: Vec<ResponsePoint>,
}

#[derive(Debug, Clone, Copy)]
pub struct ResponsePoint {
    pub n_photons: usize,
    pub mean_clicks: f64,
    pub stderr: f64,
}

/// Locate the threshold crossing of a decreasing norm function on [0, dt] by
/// bisection, to dt/64 resolution. `norm_fn(s)` re-propagates from the step
/// start by a single substep of size `s`.
pub fn jump_time_bisect<F: Fn(f64) -> f64>(norm_fn: F, dt: f64, threshold: f64) -> Result<f64> {
    if norm_fn(0.0) < threshold {
        return Err(Error::Misuse(
            "threshold lies above the norm at the step start".into(),
        ));
    }
    if norm_fn(dt) >= threshold {
        return Err(Error::Misuse("no crossing inside the step".into()));
    }
    let mut lo = 0.0;
    let mut hi = dt;
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if norm_fn(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// engine internals
// ---------------------------------------------------------------------------

/// Local compressed sparse rows over a restricted index set.
#[derive(Debug, Clone, Default)]
struct LocalCsr {
    n_rows: usize,
    row_ptr: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl LocalCsr {
    fn matvec_add(&self, factor: C64, x: &[C64], y: &mut [C64]) {
        for r in 0..self.n_rows {
            let (lo, hi) = (self.row_ptr[r] as usize, self.row_ptr[r + 1] as usize);
            if lo == hi {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] += factor * acc;
        }
    }
}

/// One jump channel restricted to the active subspace: rectangular blocks
/// from local columns onto the channel's global image rows.
#[derive(Debug, Clone)]
struct LocalJump {
    image: Vec<usize>,
    terms: Vec<(usize, LocalCsr)>,
}

/// All operators restricted to the structural closure of a support set.
#[derive(Debug, Clone)]
struct Restriction {
    global: Vec<usize>,
    heff_terms: Vec<(usize, LocalCsr)>,
    jumps: Vec<LocalJump>,
}

/// Reusable trajectory propagator for one assembled network.
pub struct McwfEngine {
    dim: usize,
    grid: TimeGrid,
    envelopes: Vec<Envelope>,
    /// effective-Hamiltonian terms as (envelope id, global matrix)
    heff_terms: Vec<(usize, SparseOp)>,
    /// jump operators as (envelope id, global matrix) per channel
    jump_terms: Vec<Vec<(usize, SparseOp)>>,
    /// union sparsity pattern of the heff terms, column -> rows
    col_to_rows: Vec<Vec<u32>>,
    initial_state: Vec<C64>,
    n_emitters: usize,
    n_photons: usize,
}

impl McwfEngine {
    pub fn new(network: &Network) -> Result<Self> {
        let dim = network.triple.dim();
        let mut envelopes: Vec<Envelope> = vec![Envelope::Const(1.0)];
        let mut static_acc = SparseOp::zero(dim);
        let mut heff_terms: Vec<(usize, SparseOp)> = Vec::new();

        let absorb = |env: Envelope,
                          op: SparseOp,
                          envelopes: &mut Vec<Envelope>,
                          static_acc: &mut SparseOp,
                          heff_terms: &mut Vec<(usize, SparseOp)>| {
            match env {
                Envelope::Const(v) => *static_acc = static_acc.add(&op.scale(C64::new(v, 0.0))),
                e => {
                    envelopes.push(e);
                    heff_terms.push((envelopes.len() - 1, op));
                }
            }
        };

        for (env, op) in &network.triple.hamiltonian.terms {
            absorb(env.clone(), op.clone(), &mut envelopes, &mut static_acc, &mut heff_terms);
        }
        let minus_half_i = C64::new(0.0, -0.5);
        for channel in &network.triple.coupling {
            for (ea, a) in &channel.terms {
                for (eb, b) in &channel.terms {
                    let op = a.adjoint().matmul(b).scale(minus_half_i);
                    if op.nnz() > 0 {
                        absorb(
                            ea.product(eb),
                            op,
                            &mut envelopes,
                            &mut static_acc,
                            &mut heff_terms,
                        );
                    }
                }
            }
        }
        if static_acc.nnz() > 0 {
            heff_terms.push((0, static_acc));
        }

        let mut jump_terms = Vec::with_capacity(network.triple.coupling.len());
        for channel in &network.triple.coupling {
            let mut terms = Vec::new();
            for (env, op) in &channel.terms {
                if op.nnz() == 0 {
                    continue;
                }
                let id = match env {
                    Envelope::Const(1.0) => 0,
                    e => {
                        envelopes.push(e.clone());
                        envelopes.len() - 1
                    }
                };
                terms.push((id, op.clone()));
            }
            jump_terms.push(terms);
        }

        // union pattern adjacency: which rows receive weight from a column
        let mut col_to_rows: Vec<Vec<u32>> = vec![Vec::new(); dim];
        for (_, op) in &heff_terms {
            for (r, c, _) in op.triplets() {
                col_to_rows[c].push(r as u32);
            }
        }
        for rows in &mut col_to_rows {
            rows.sort_unstable();
            rows.dedup();
        }

        Ok(Self {
            dim,
            grid: network.grid,
            envelopes,
            heff_terms,
            jump_terms,
            col_to_rows,
            initial_state: network.initial_state.clone(),
            n_emitters: network.n_emitters,
            n_photons: network.n_photons,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    /// Structural closure of a support set under the effective-Hamiltonian
    /// pattern.
    fn closure(&self, support: &[usize]) -> Vec<usize> {
        let mut in_set = vec![false; self.dim];
        let mut stack: Vec<usize> = Vec::new();
        for &s in support {
            if !in_set[s] {
                in_set[s] = true;
                stack.push(s);
            }
        }
        while let Some(c) = stack.pop() {
            for &r in &self.col_to_rows[c] {
                let r = r as usize;
                if !in_set[r] {
                    in_set[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..self.dim).filter(|&i| in_set[i]).collect()
    }

    fn restrict_square(op: &SparseOp, global: &[usize], local_of: &[u32]) -> LocalCsr {
        let n = global.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0u32);
        for &g in global {
            for (c, v) in op.row(g) {
                let lc = local_of[c];
                if lc != u32::MAX {
                    cols.push(lc);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len() as u32);
        }
        LocalCsr { n_rows: n, row_ptr, cols, vals }
    }

    fn restriction(&self, support: &[usize]) -> Restriction {
        let global = self.closure(support);
        let mut local_of = vec![u32::MAX; self.dim];
        for (i, &g) in global.iter().enumerate() {
            local_of[g] = i as u32;
        }
        let heff_terms = self
            .heff_terms
            .iter()
            .map(|(id, op)| (*id, Self::restrict_square(op, &global, &local_of)))
            .collect();

        let mut jumps = Vec::with_capacity(self.jump_terms.len());
        for channel in &self.jump_terms {
            // image rows: any row receiving weight from a local column
            let mut image: Vec<usize> = Vec::new();
            for (_, op) in channel {
                for (r, c, _) in op.triplets() {
                    if local_of[c] != u32::MAX {
                        image.push(r);
                    }
                }
            }
            image.sort_unstable();
            image.dedup();
            let mut image_of = vec![u32::MAX; self.dim];
            for (i, &g) in image.iter().enumerate() {
                image_of[g] = i as u32;
            }
            let mut terms = Vec::new();
            for (id, op) in channel {
                let mut row_ptr = Vec::with_capacity(image.len() + 1);
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                row_ptr.push(0u32);
                for &g in &image {
                    for (c, v) in op.row(g) {
                        let lc = local_of[c];
                        if lc != u32::MAX {
                            cols.push(lc);
                            vals.push(v);
                        }
                    }
                    row_ptr.push(cols.len() as u32);
                }
                terms.push((*id, LocalCsr { n_rows: image.len(), row_ptr, cols, vals }));
            }
            jumps.push(LocalJump { image, terms });
        }
        Restriction { global, heff_terms, jumps }
    }

    fn eval_envelopes(&self, t: f64, buf: &mut [f64]) {
        for (i, env) in self.envelopes.iter().enumerate() {
            buf[i] = env.eval(t);
        }
    }

    /// One RK4 step of `d psi/dt = -i H_eff(t) psi` on the restricted state.
    #[allow(clippy::too_many_arguments)]
    fn rk4_step(
        &self,
        res: &Restriction,
        psi: &[C64],
        t: f64,
        h: f64,
        out: &mut Vec<C64>,
        work: &mut RkWork,
    ) {
        let n = psi.len();
        work.resize(n, self.envelopes.len());
        let minus_i = C64::new(0.0, -1.0);

        let apply = |env_vals: &[f64], x: &[C64], y: &mut Vec<C64>| {
            y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (id, op) in &res.heff_terms {
                let w = env_vals[*id];
                if w != 0.0 {
                    op.matvec_add(minus_i * w, x, y);
                }
            }
        };

        self.eval_envelopes(t, &mut work.env_a);
        self.eval_envelopes(t + 0.5 * h, &mut work.env_b);
        self.eval_envelopes(t + h, &mut work.env_c);

        apply(&work.env_a, psi, &mut work.k1);
        for i in 0..n {
            work.tmp[i] = psi[i] + 0.5 * h * work.k1[i];
        }
        apply(&work.env_b, &work.tmp, &mut work.k2);
        for i in 0..n {
            work.tmp[i] = psi[i] + 0.5 * h * work.k2[i];
        }
        apply(&work.env_b, &work.tmp, &mut work.k3);
        for i in 0..n {
            work.tmp[i] = psi[i] + h * work.k3[i];
        }
        apply(&work.env_c, &work.tmp, &mut work.k4);

        out.resize(n, C64::new(0.0, 0.0));
        let w = h / 6.0;
        for i in 0..n {
            out[i] = psi[i] + w * (work.k1[i] + 2.0 * (work.k2[i] + work.k3[i]) + work.k4[i]);
        }
    }

    /// Run one seeded trajectory.
    pub fn run_trajectory(&self, seed: u64) -> Result<TrajectoryRecord> {
        let mut rng = RngStream::new(seed, 0);
        let mut threshold = rng.uniform();

        let support: Vec<usize> = self
            .initial_state
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect();
        let mut res = self.restriction(&support);
        let mut psi: Vec<C64> = res.global.iter().map(|&g| self.initial_state[g]).collect();

        let mut work = RkWork::default();
        let mut stepped = Vec::new();
        let mut jumps: Vec<JumpEvent> = Vec::new();
        let mut survival = Vec::with_capacity(self.grid.n_points());
        survival.push(norm_sqr(&psi));

        for k in 0..self.grid.n_points() - 1 {
            let mut tau = self.grid.time(k);
            let t_next = self.grid.time(k + 1);
            loop {
                let h = t_next - tau;
                let before = norm_sqr(&psi);
                self.rk4_step(&res, &psi, tau, h, &mut stepped, &mut work);
                let after = norm_sqr(&stepped);
                if !after.is_finite() {
                    return Err(Error::Instability(format!(
                        "trajectory state lost finiteness near t = {tau:.4}"
                    )));
                }
                if after >= threshold {
                    if before > 0.0 && 1.0 - after / before > MAX_NORM_DROP {
                        return Err(Error::Instability(format!(
                            "norm dropped by {:.1}% in one step at t = {tau:.4}; \
                             the grid is too coarse",
                            100.0 * (1.0 - after / before)
                        )));
                    }
                    std::mem::swap(&mut psi, &mut stepped);
                    break;
                }
                // a jump fires inside (tau, t_next]
                let s = jump_time_bisect(
                    |s| {
                        if s == 0.0 {
                            return before;
                        }
                        let mut out = Vec::new();
                        self.rk4_step(&res, &psi, tau, s, &mut out, &mut RkWork::default());
                        norm_sqr(&out)
                    },
                    h,
                    threshold,
                )?;
                let t_jump = tau + s;
                self.rk4_step(&res, &psi, tau, s, &mut stepped, &mut work);

                // channel weights at the jump time
                let mut env_vals = vec![0.0; self.envelopes.len()];
                self.eval_envelopes(t_jump, &mut env_vals);
                let mut weights = Vec::with_capacity(res.jumps.len());
                let mut post_states: Vec<Vec<C64>> = Vec::with_capacity(res.jumps.len());
                for jump in &res.jumps {
                    let mut y = vec![C64::new(0.0, 0.0); jump.image.len()];
                    for (id, op) in &jump.terms {
                        let w = env_vals[*id];
                        if w != 0.0 {
                            op.matvec_add(C64::new(w, 0.0), &stepped, &mut y);
                        }
                    }
                    weights.push(norm_sqr(&y));
                    post_states.push(y);
                }
                let total: f64 = weights.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Instability(format!(
                        "norm crossed the jump threshold at t = {t_jump:.4} but every \
                         channel weight vanished"
                    )));
                }
                let draw = rng.uniform() * total;
                let mut acc = 0.0;
                let mut channel = res.jumps.len() - 1;
                for (c, w) in weights.iter().enumerate() {
                    acc += w;
                    if draw < acc {
                        channel = c;
                        break;
                    }
                }
                jumps.push(JumpEvent { time: t_jump, channel: channel + 1 });

                // collapse, renormalize, rebuild the restriction
                let post = &post_states[channel];
                let norm = norm_sqr(post).sqrt();
                let image = res.jumps[channel].image.clone();
                let support: Vec<usize> = image
                    .iter()
                    .zip(post.iter())
                    .filter(|(_, v)| v.norm_sqr() > 0.0)
                    .map(|(&g, _)| g)
                    .collect();
                let mut full = vec![C64::new(0.0, 0.0); 0];
                let new_res = self.restriction(&support);
                full.resize(new_res.global.len(), C64::new(0.0, 0.0));
                for (&g, v) in image.iter().zip(post.iter()) {
                    if let Ok(pos) = new_res.global.binary_search(&g) {
                        full[pos] = v / norm;
                    }
                }
                res = new_res;
                psi = full;
                threshold = rng.uniform();
                tau = t_jump;
                if t_next - tau <= f64::EPSILON * tau.abs().max(1.0) {
                    break;
                }
            }
            survival.push(norm_sqr(&psi));
        }

        // expand the restricted state back to the full space
        let mut final_state = vec![C64::new(0.0, 0.0); self.dim];
        for (&g, v) in res.global.iter().zip(psi.iter()) {
            final_state[g] = *v;
        }
        Ok(TrajectoryRecord { seed, jumps, final_state, survival_trace: survival })
    }

    /// Run `m` independent trajectories seeded `base_seed..base_seed + m`,
    /// in parallel, with deterministic per-index results.
    pub fn run_ensemble(&self, m: usize, base_seed: u64) -> Result<Vec<TrajectoryRecord>> {
        if m == 0 {
            return Err(Error::Config("ensemble needs at least one trajectory".into()));
        }
        (0..m)
            .into_par_iter()
            .map(|i| self.run_trajectory(base_seed + i as u64))
            .collect()
    }
}

#[derive(Default)]
struct RkWork {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    env_a: Vec<f64>,
    env_b: Vec<f64>,
    env_c: Vec<f64>,
}

impl RkWork {
    fn resize(&mut self, n: usize, n_env: usize) {
        for v in [&mut self.k1, &mut self.k2, &mut self.k3, &mut self.k4, &mut self.tmp] {
            v.resize(n, C64::new(0.0, 0.0));
        }
        for v in [&mut self.env_a, &mut self.env_b, &mut self.env_c] {
            v.resize(n_env, 0.0);
        }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Run a single trajectory on a network (convenience wrapper; build a
/// [`McwfEngine`] once when running many).
pub fn run_trajectory(network: &Network, seed: u64) -> Result<TrajectoryRecord> {
    McwfEngine::new(network)?.run_trajectory(seed)
}

/// Ensemble runner building the engine once.
pub fn run_ensemble(network: &Network, m: usize, base_seed: u64) -> Result<Vec<TrajectoryRecord>> {
    McwfEngine::new(network)?.run_ensemble(m, base_seed)
}

/// Outcome-probability estimates with binomial confidence intervals.
#[derive(Debug, Clone)]
pub struct OutcomeEstimate {
    /// index j: 0 = no photon subtracted, j >= 1 = the j-th detected photon
    /// was subtracted
    pub probabilities: Vec<f64>,
    pub stderr: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Classify single-emitter trajectories by which arriving photon was
/// subtracted: the number of forward-channel detections preceding the
/// subtraction click, plus one. Simultaneous jumps cannot occur (each
/// collapse is instantaneous and ordered by the record).
pub fn estimate_outcomes(
    records: &[TrajectoryRecord],
    n_emitters: usize,
    n_photons: usize,
) -> Result<OutcomeEstimate> {
    if n_emitters != 1 {
        return Err(Error::Unsupported(
            "outcome classification applies to single-emitter networks".into(),
        ));
    }
    if records.is_empty() {
        return Err(Error::InsufficientStatistics("no trajectories given".into()));
    }
    let mut counts = vec![0usize; n_photons + 1];
    for record in records {
        let mut outcome = 0usize;
        let mut forward_before = 0usize;
        for jump in &record.jumps {
            if jump.channel == 1 {
                outcome = forward_before + 1;
                break;
            }
            forward_before += 1;
        }
        if outcome > n_photons {
            return Err(Error::Domain(format!(
                "trajectory {} recorded more photons than the input carried",
                record.seed
            )));
        }
        counts[outcome] += 1;
    }
    let m = records.len() as f64;
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    let stderr = probabilities
        .iter()
        .map(|&p| (p * (1.0 - p) / m).sqrt())
        .collect();
    Ok(OutcomeEstimate { probabilities, stderr, counts })
}

/// Binned two-time correlation surface of forward-channel detections.
#[derive(Debug, Clone)]
pub struct G2Histogram {
    pub t_start: f64,
    pub bin_width: f64,
    pub n_bins: usize,
    /// symmetric matrix, normalized by bin area and selected-trajectory count
    pub bins: Vec<Vec<f64>>,
    pub n_selected: usize,
}

/// Histogram forward-channel jump-time pairs over post-selected trajectories.
pub fn estimate_g2<F: Fn(&TrajectoryRecord) -> bool>(
    records: &[TrajectoryRecord],
    n_emitters: usize,
    postselect: F,
    bin_width: f64,
    window: (f64, f64),
) -> Result<G2Histogram> {
    if !(bin_width > 0.0) {
        return Err(Error::Config("bin width must be positive".into()));
    }
    let forward = n_emitters + 1;
    let n_bins = ((window.1 - window.0) / bin_width).ceil() as usize;
    let mut bins = vec![vec![0.0f64; n_bins]; n_bins];
    let mut n_selected = 0usize;
    for record in records.iter().filter(|r| postselect(r)) {
        n_selected += 1;
        let times: Vec<f64> = record
            .jumps
            .iter()
            .filter(|j| j.channel == forward)
            .map(|j| j.time)
            .collect();
        for (i, &t1) in times.iter().enumerate() {
            for &t2 in &times[i + 1..] {
                let b1 = ((t1 - window.0) / bin_width).floor();
                let b2 = ((t2 - window.0) / bin_width).floor();
                if b1 < 0.0 || b2 < 0.0 {
                    continue;
                }
                let (b1, b2) = (b1 as usize, b2 as usize);
                if b1 < n_bins && b2 < n_bins {
                    bins[b1][b2] += 1.0;
                    bins[b2][b1] += 1.0;
                }
            }
        }
    }
    if n_selected < 100 {
        return Err(Error::InsufficientStatistics(format!(
            "only {n_selected} trajectories survive the post-selection"
        )));
    }
    let norm = 1.0 / (bin_width * bin_width * n_selected as f64);
    for row in &mut bins {
        for v in row.iter_mut() {
            *v *= norm;
        }
    }
    Ok(G2Histogram { t_start: window.0, bin_width, n_bins, bins, n_selected })
}

/// Detector response: mean click count versus input photon number for an
/// n-emitter cascade at the given pulse width.
pub fn response_curve(
    n_emitters: usize,
    delta_gamma: f64,
    photon_numbers: &[usize],
    m: usize,
    base_seed: u64,
) -> Result<ResponseCurve> {
    use crate::pulses::PulseSpec;
    let mut points = Vec::with_capacity(photon_numbers.len());
    for (idx, &n_photons) in photon_numbers.iter().enumerate() {
        let spec = PulseSpec::gaussian_fock(n_photons, delta_gamma)?;
        let network = crate::slh::full_network(&spec, n_emitters, crate::GAMMA_G)?;
        let engine = McwfEngine::new(&network)?;
        let records = engine.run_ensemble(m, base_seed.wrapping_add((idx as u64) << 32))?;
        let clicks: Vec<f64> = records
            .iter()
            .map(|r| ClickSummary::from_record(r, n_emitters, n_photons).inferred_count as f64)
            .collect();
        let mean = clicks.iter().sum::<f64>() / m as f64;
        let var = clicks.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>()
            / (m as f64 - 1.0).max(1.0);
        points.push(ResponsePoint {
            n_photons,
            mean_clicks: mean,
            stderr: (var / m as f64).sqrt(),
        });
    }
    Ok(ResponseCurve { points })
}
