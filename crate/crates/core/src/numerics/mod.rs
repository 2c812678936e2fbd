//! Shared numerical kernels: adaptive 1-D and ordered-simplex quadrature,
//! fixed-step propagation under non-Hermitian generators, Hermite polynomials,
//! and a splittable deterministic pseudo-random generator.
//!
//! Everything here is pure: identical inputs give bit-identical outputs.

mod hermite;
mod ode;
mod quad;
mod rng;

pub use hermite::hermite_poly;
pub use ode::evolve_nonunitary;
pub use quad::{quad_1d, quad_simplex, MAX_SIMPLEX_DIM};
pub use rng::RngStream;

use crate::error::{Error, Result};

/// Uniform time grid in units of 1/gamma_g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::Config(format!(
                "time grid needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::Config(format!(
                "time grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Self { t_start, t_end, n_points })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t_start + self.dt() * index as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.time(i))
    }
}

/// Tolerances for the adaptive quadrature routines. The accepted error is
/// `max(abs_tol, rel_tol * |result|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if abs_tol < 0.0 || rel_tol < 0.0 || (abs_tol == 0.0 && rel_tol == 0.0) {
            return Err(Error::Config(
                "quadrature needs abs_tol >= 0, rel_tol >= 0, one of them positive".into(),
            ));
        }
        if max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be positive".into()));
        }
        Ok(Self { abs_tol, rel_tol, max_subdivisions })
    }

    pub fn with_tolerance_factor(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 4000 }
    }
}
