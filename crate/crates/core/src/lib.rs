//! Simulation of photon-number-resolving detection by a cascade of
//! waveguide-coupled Lambda-type photon subtractors.
//!
//! The crate computes detector statistics along three mutually cross-checking
//! routes, plus a conventional baseline:
//!
//! - [`scattering`] / [`nonlinear`]: exact time-domain scattering elements of a
//!   single subtractor and the nested-quadrature observables built from them
//!   (outcome probabilities, two-time correlators, zero-delay g2).
//! - [`linear`]: the frequency-domain single-photon transfer model for an
//!   n-emitter cascade and its photon-counting error.
//! - [`slh`] / [`trajectory`]: the composed input-output network driven by a
//!   shaped-cavity source, unravelled with the Monte-Carlo wavefunction method.
//! - [`conventional`]: the beamsplitter-tree click statistics used as the
//!   comparison baseline.
//!
//! Throughout, gamma_g = 1 fixes the unit of time, and the dimensionless
//! sweep parameter is the pulse width delta in those units.

pub mod conventional;
pub mod error;
pub mod linear;
pub mod nonlinear;
pub mod numerics;
pub mod operators;
pub mod pulses;
pub mod scattering;
pub mod slh;
pub mod trajectory;

pub use error::{Error, Result};

/// Emitter-waveguide coupling rate; the global unit of time is 1/GAMMA_G.
pub const GAMMA_G: f64 = 1.0;
