//! SLH input-output description of the network: emitter triples, the series
//! product, the cascaded detector, and shaped-cavity Fock-pulse sources.
//!
//! Time dependence is represented as real scalar envelopes multiplying
//! constant sparse operators; only the source coupling is time-dependent.
//! Channel conventions: channels 1..n are the subtraction ports of emitters
//! 1..n, channel n+1 is the shared forward waveguide.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::TimeGrid;
use crate::operators::{HilbertLayout, LocalOp, SparseOp};
use crate::pulses::{PulseFamily, PulseSpec, WavePacket};
use crate::GAMMA_G;

/// Largest composite dimension accepted when assembling a network.
pub const MAX_NETWORK_DIM: usize = 20_000;

/// Coupling-envelope clip; the exact release shaping diverges as the source
/// cavity empties.
pub const KAPPA_MAX: f64 = 50.0 * GAMMA_G;

/// Real scalar envelope multiplying a constant operator.
#[derive(Clone)]
pub enum Envelope {
    Const(f64),
    Varying(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Const(v) => *v,
            Envelope::Varying(f) => f(t),
        }
    }

    pub fn product(&self, other: &Envelope) -> Envelope {
        match (self, other) {
            (Envelope::Const(a), Envelope::Const(b)) => Envelope::Const(a * b),
            (a, b) => {
                let (a, b) = (a.clone(), b.clone());
                Envelope::Varying(Arc::new(move |t| a.eval(t) * b.eval(t)))
            }
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Envelope::Const(_))
    }
}

impl std::fmt::Debug for Envelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Envelope::Const(v) => write!(f, "Const({v})"),
            Envelope::Varying(_) => write!(f, "Varying(..)"),
        }
    }
}

/// Sum of envelope-weighted sparse operators.
#[derive(Debug, Clone)]
pub struct OperatorSum {
    dim: usize,
    pub terms: Vec<(Envelope, SparseOp)>,
}

impl OperatorSum {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(op: SparseOp) -> Self {
        let dim = op.dim();
        Self { dim, terms: vec![(Envelope::Const(1.0), op)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, env: Envelope, op: SparseOp) {
        debug_assert_eq!(op.dim(), self.dim);
        self.terms.push((env, op));
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.clone());
        Self { dim: self.dim, terms }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, op)| (e.clone(), op.scale(factor)))
                .collect(),
        }
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|(e, _)| e.is_const())
    }

    /// Materialize the operator at time `t`.
    pub fn at(&self, t: f64) -> SparseOp {
        let mut acc = SparseOp::zero(self.dim);
        for (env, op) in &self.terms {
            acc = acc.add(&op.scale(C64::new(env.eval(t), 0.0)));
        }
        acc
    }

    /// Fold all constant-envelope terms into a single matrix, returning it
    /// together with the remaining time-dependent terms.
    pub fn split_static(&self) -> (SparseOp, Vec<(Envelope, SparseOp)>) {
        let mut fixed = SparseOp::zero(self.dim);
        let mut varying = Vec::new();
        for (env, op) in &self.terms {
            match env {
                Envelope::Const(v) => fixed = fixed.add(&op.scale(C64::new(*v, 0.0))),
                e => varying.push((e.clone(), op.clone())),
            }
        }
        (fixed, varying)
    }
}

/// An SLH node: scalar direct-scattering matrix, one coupling operator per
/// channel, and the internal Hamiltonian (Hermitian at every time).
#[derive(Debug, Clone)]
pub struct SLHTriple {
    pub scattering: Vec<Vec<C64>>,
    pub coupling: Vec<OperatorSum>,
    pub hamiltonian: OperatorSum,
}

impl SLHTriple {
    pub fn n_channels(&self) -> usize {
        self.coupling.len()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Identity node with the given channel count.
    pub fn neutral(channels: usize, dim: usize) -> Self {
        let mut scattering = vec![vec![C64::new(0.0, 0.0); channels]; channels];
        for (k, row) in scattering.iter_mut().enumerate() {
            row[k] = C64::new(1.0, 0.0);
        }
        Self {
            scattering,
            coupling: (0..channels).map(|_| OperatorSum::zero(dim)).collect(),
            hamiltonian: OperatorSum::zero(dim),
        }
    }
}

/// Scalar matrix product for the direct-scattering part.
fn smat_mul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[r][k] * b[k][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

/// Cascade composition `upstream > downstream` (the output of the first
/// argument feeds the second):
/// `S = S2 S1`, `L = L2 + S2 L1`,
/// `H = H1 + H2 - (i/2) (L2^dag S2 L1 - L1^dag S2^dag L2)`.
pub fn series_product(upstream: &SLHTriple, downstream: &SLHTriple) -> Result<SLHTriple> {
    if upstream.n_channels() != downstream.n_channels() {
        return Err(Error::Config(format!(
            "channel mismatch: {} vs {}",
            upstream.n_channels(),
            downstream.n_channels()
        )));
    }
    if upstream.dim() != downstream.dim() {
        return Err(Error::Config(format!(
            "layout dimension mismatch: {} vs {}",
            upstream.dim(),
            downstream.dim()
        )));
    }
    let n = upstream.n_channels();
    let dim = upstream.dim();
    let scattering = smat_mul(&downstream.scattering, &upstream.scattering);

    // S2 L1, channel-wise
    let mut s2l1 = Vec::with_capacity(n);
    for r in 0..n {
        let mut acc = OperatorSum::zero(dim);
        for k in 0..n {
            let s = downstream.scattering[r][k];
            if s.norm_sqr() > 0.0 {
                acc = acc.add(&upstream.coupling[k].scale(s));
            }
        }
        s2l1.push(acc);
    }

    let coupling: Vec<OperatorSum> = (0..n)
        .map(|r| downstream.coupling[r].add(&s2l1[r]))
        .collect();

    let mut hamiltonian = upstream.hamiltonian.add(&downstream.hamiltonian);
    let minus_half_i = C64::new(0.0, -0.5);
    for r in 0..n {
        for (e2, a) in &downstream.coupling[r].terms {
            for (e1, b) in &s2l1[r].terms {
                // -(i/2) (A^dag B - B^dag A), Hermitian for real envelopes
                let cross = a.adjoint().matmul(b);
                let op = cross.sub(&cross.adjoint()).scale(minus_half_i);
                if op.nnz() > 0 {
                    hamiltonian.push(e2.product(e1), op);
                }
            }
        }
    }
    Ok(SLHTriple { scattering, coupling, hamiltonian })
}

fn emitter_label(i: usize) -> String {
    format!("emitter{i}")
}

/// Three-level emitter operators live on levels |1>, |2>, |3> (zero-based
/// rows 0, 1, 2).
fn sigma(row: usize, col: usize) -> LocalOp {
    LocalOp::transition(3, row - 1, col - 1)
}

/// SLH node of the `i`-th emitter (1-based) in an `n`-emitter detector:
/// `n + 1` channels, its subtraction port on channel `i`, the forward port
/// shared on channel `n + 1`, and `H = 0` in the resonant rotating frame.
pub fn emitter_triple(
    i: usize,
    n: usize,
    gamma: f64,
    layout: &HilbertLayout,
) -> Result<SLHTriple> {
    if i == 0 || i > n {
        return Err(Error::Config(format!("emitter index {i} out of range 1..={n}")));
    }
    let label = emitter_label(i);
    if layout.position(&label).is_none() {
        return Err(Error::Config(format!("layout is missing subsystem {label}")));
    }
    let dim = layout.total_dim();
    let root_gamma = gamma.sqrt();
    let s23 = layout.embed(&label, &sigma(2, 3))?.scale(C64::new(root_gamma, 0.0));
    let s13 = layout.embed(&label, &sigma(1, 3))?.scale(C64::new(root_gamma, 0.0));
    let mut coupling: Vec<OperatorSum> = (0..=n).map(|_| OperatorSum::zero(dim)).collect();
    coupling[i - 1] = OperatorSum::constant(s23);
    coupling[n] = OperatorSum::constant(s13);
    let mut triple = SLHTriple::neutral(n + 1, dim);
    triple.coupling = coupling;
    Ok(triple)
}

/// Direct construction of the n-emitter cascade:
/// `L = sqrt(gamma) [sigma_23^(1), ..., sigma_23^(n), sum_i sigma_13^(i)]`
/// and the forward-coupling Hamiltonian
/// `H = (gamma/2i) [sum_{j=2}^n sigma_31^(j) sum_{i<j} sigma_13^(i) - H.c.]`.
pub fn cascade_detector(n: usize, gamma: f64, layout: &HilbertLayout) -> Result<SLHTriple> {
    if n == 0 {
        return Err(Error::Degenerate("a detector needs at least one emitter".into()));
    }
    let dim = layout.total_dim();
    let root_gamma = gamma.sqrt();
    let mut coupling = Vec::with_capacity(n + 1);
    let mut forward = SparseOp::zero(dim);
    let mut s13 = Vec::with_capacity(n);
    for i in 1..=n {
        let label = emitter_label(i);
        let op = layout.embed(&label, &sigma(1, 3))?;
        forward = forward.add(&op.scale(C64::new(root_gamma, 0.0)));
        s13.push(op);
        coupling.push(OperatorSum::constant(
            layout.embed(&label, &sigma(2, 3))?.scale(C64::new(root_gamma, 0.0)),
        ));
    }
    coupling.push(OperatorSum::constant(forward));

    // (gamma/2i)(A - A^dag) with A = sum_{j>i} sigma_31^(j) sigma_13^(i)
    let mut a = SparseOp::zero(dim);
    for j in 2..=n {
        let s31_j = s13[j - 1].adjoint();
        for i in 1..j {
            a = a.add(&s31_j.matmul(&s13[i - 1]));
        }
    }
    let h = a.sub(&a.adjoint()).scale(C64::new(0.0, -0.5 * gamma));
    let hamiltonian = if h.nnz() > 0 {
        OperatorSum::constant(h)
    } else {
        OperatorSum::zero(dim)
    };
    let mut triple = SLHTriple::neutral(n + 1, dim);
    triple.coupling = coupling;
    triple.hamiltonian = hamiltonian;
    Ok(triple)
}

/// Shaped release envelope for one wavepacket: precomputed
/// `kappa(t) = |h(t)|^2 / (1 - int_{-inf}^t |h|^2)`, clipped at [`KAPPA_MAX`]
/// and switched off once the remaining weight drops below 1e-6.
#[derive(Debug)]
struct KappaTable {
    t0: f64,
    step: f64,
    kappa: Vec<f64>,
}

impl KappaTable {
    fn build(packet: &WavePacket, t_grid: &TimeGrid) -> Self {
        let t0 = t_grid.t_start();
        let span = t_grid.t_end() - t0;
        let scale = packet.width().min(1.0 / GAMMA_G);
        let n = ((span / scale * 400.0).ceil() as usize)
            .max(4 * t_grid.n_points())
            .max(1000);
        let step = span / n as f64;
        // 4-point Gauss-Legendre cumulative integration of |h|^2
        const X: [f64; 4] = [-0.861136311594053, -0.339981043584856, 0.339981043584856, 0.861136311594053];
        const W: [f64; 4] = [0.347854845137454, 0.652145154862546, 0.652145154862546, 0.347854845137454];
        let mut kappa = Vec::with_capacity(n + 1);
        let mut cum = 0.0;
        let dens = |t: f64| packet.eval(t).norm_sqr();
        kappa.push(Self::kappa_value(dens(t0), 1.0 - cum));
        for k in 0..n {
            let lo = t0 + k as f64 * step;
            let c = lo + 0.5 * step;
            let h = 0.5 * step;
            let panel: f64 = X.iter().zip(W.iter()).map(|(&x, &w)| w * dens(c + h * x)).sum::<f64>() * h;
            cum += panel;
            kappa.push(Self::kappa_value(dens(lo + step), 1.0 - cum.min(1.0)));
        }
        Self { t0, step, kappa }
    }

    fn kappa_value(intensity: f64, remaining: f64) -> f64 {
        if remaining < 1e-6 {
            0.0
        } else {
            (intensity / remaining).min(KAPPA_MAX)
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.step;
        if x <= 0.0 {
            return self.kappa[0];
        }
        let i = x as usize;
        if i + 1 >= self.kappa.len() {
            return *self.kappa.last().unwrap();
        }
        let frac = x - i as f64;
        self.kappa[i] * (1.0 - frac) + self.kappa[i + 1] * frac
    }
}

/// Shaped-cavity source releasing the pulse described by `spec` into the
/// forward channel (channel n+1 of an (n+1)-channel network). One cavity per
/// temporal mode: a Fock state |N> for the single-wavepacket family, one
/// single-photon cavity per packet for separated wavepackets.
pub fn source_triple(
    spec: &PulseSpec,
    n_channels: usize,
    layout: &HilbertLayout,
    t_grid: &TimeGrid,
) -> Result<SLHTriple> {
    let packets = source_packets(spec)?;
    let dim = layout.total_dim();
    let mut forward = OperatorSum::zero(dim);
    let mut hamiltonian = OperatorSum::zero(dim);
    for (idx, packet) in packets.iter().enumerate() {
        let label = format!("cavity{}", idx + 1);
        let pos = layout
            .position(&label)
            .ok_or_else(|| Error::Config(format!("layout is missing subsystem {label}")))?;
        let cav_dim = layout.dim_of(pos);
        let a = layout.embed(&label, &LocalOp::annihilation(cav_dim))?;
        let table = Arc::new(KappaTable::build(packet, t_grid));
        let sqrt_kappa = {
            let table = Arc::clone(&table);
            Envelope::Varying(Arc::new(move |t| table.eval(t).sqrt()))
        };
        forward.push(sqrt_kappa, a);
        if spec.detuning != 0.0 {
            let num = layout.embed(&label, &LocalOp::number(cav_dim))?;
            hamiltonian.push(Envelope::Const(spec.detuning), num);
        }
    }
    let mut triple = SLHTriple::neutral(n_channels, dim);
    let last = n_channels - 1;
    triple.coupling[last] = forward;
    triple.hamiltonian = hamiltonian;
    Ok(triple)
}

/// The temporal modes the source has to release, with their initial cavity
/// occupation and truncation.
fn source_packets(spec: &PulseSpec) -> Result<Vec<WavePacket>> {
    match spec.family {
        PulseFamily::GaussianFock => Ok(vec![spec.wavepackets()[0]]),
        PulseFamily::SeparatedGaussians { .. } => Ok(spec.wavepackets()),
        PulseFamily::HermiteGaussPair { .. } => Err(Error::Unsupported(
            "shaped-cavity release of overlapping orthogonal modes is not available".into(),
        )),
    }
}

/// Cavity subsystems (label, dimension, initial occupation) for a source.
pub fn source_subsystems(spec: &PulseSpec) -> Result<Vec<(String, usize, usize)>> {
    match spec.family {
        PulseFamily::GaussianFock => Ok(vec![(
            "cavity1".into(),
            spec.n_photons + 1,
            spec.n_photons,
        )]),
        PulseFamily::SeparatedGaussians { .. } => Ok((1..=spec.n_photons)
            .map(|i| (format!("cavity{i}"), 2, 1))
            .collect()),
        PulseFamily::HermiteGaussPair { .. } => Err(Error::Unsupported(
            "shaped-cavity release of overlapping orthogonal modes is not available".into(),
        )),
    }
}

/// A fully assembled network: source cascaded into the n-emitter detector,
/// with its layout, initial state, and propagation grid.
#[derive(Debug, Clone)]
pub struct Network {
    pub triple: SLHTriple,
    pub layout: HilbertLayout,
    pub initial_state: Vec<C64>,
    pub grid: TimeGrid,
    pub n_emitters: usize,
    pub n_photons: usize,
}

/// Propagation grid for a source release: from just before the pulse to the
/// end of the release window plus an 8/gamma_g decay tail, stepped at
/// `dt <= min(0.01/gamma_g, delta/200)`.
pub fn release_grid(spec: &PulseSpec) -> Result<TimeGrid> {
    let packets = spec.wavepackets();
    let first = packets.iter().map(|p| p.center()).fold(f64::INFINITY, f64::min);
    let last = packets.iter().map(|p| p.center()).fold(f64::NEG_INFINITY, f64::max);
    let t_start = first - 3.2 * spec.delta;
    let t_end = last + 1.8 * spec.delta + 8.0 / GAMMA_G;
    let dt = (0.01 / GAMMA_G).min(spec.delta / 200.0);
    let n_points = ((t_end - t_start) / dt).ceil() as usize + 1;
    TimeGrid::new(t_start, t_end, n_points)
}

/// Assemble source + cascade for `n` emitters at coupling `gamma`.
pub fn full_network(spec: &PulseSpec, n: usize, gamma: f64) -> Result<Network> {
    let mut subsystems = Vec::new();
    let cavities = source_subsystems(spec)?;
    for (label, dim, _) in &cavities {
        subsystems.push((label.clone(), *dim));
    }
    for i in 1..=n {
        subsystems.push((emitter_label(i), 3));
    }
    let layout = HilbertLayout::new(subsystems)?;
    if layout.total_dim() > MAX_NETWORK_DIM {
        return Err(Error::Config(format!(
            "network dimension {} exceeds the cap {MAX_NETWORK_DIM}",
            layout.total_dim()
        )));
    }
    let grid = release_grid(spec)?;
    let source = source_triple(spec, n + 1, &layout, &grid)?;
    let detector = cascade_detector(n, gamma, &layout)?;
    let triple = series_product(&source, &detector)?;

    let mut occupations = Vec::with_capacity(layout.len());
    for (_, _, occ) in &cavities {
        occupations.push(*occ);
    }
    occupations.extend(std::iter::repeat(0).take(n)); // emitters in |1>
    let mut initial_state = vec![C64::new(0.0, 0.0); layout.total_dim()];
    initial_state[layout.state_index(&occupations)?] = C64::new(1.0, 0.0);

    Ok(Network {
        triple,
        layout,
        initial_state,
        grid,
        n_emitters: n,
        n_photons: spec.n_photons,
    })
}
