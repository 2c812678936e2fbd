//! Crate-wide error type.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Adaptive quadrature exhausted its subdivision budget. Carries the best
    /// estimate so callers can decide whether to accept it anyway.
    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions \
             (best estimate {estimate}, error bound {error:.3e})")]
    QuadratureConvergence {
        estimate: C64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integration over {n} ordered variables is not supported (maximum {max})")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
