//! Numerics for the time-fractional stochastic heat equation on a ball:
//! Mittag-Leffler and subordinator special functions, Dirichlet heat kernels,
//! second-moment Volterra solvers, Monte Carlo mild solutions and noise-excitation fits.

pub mod error;
pub mod excitation;
pub mod fracfun;
pub mod kernels;
pub mod moments;
pub mod quadrature;
pub mod real;
pub mod simulate;
pub mod validation;

pub use error::{Error, Result};
pub use real::Real;

pub type Sampled64 = fracfun::SampledFunction<f64>;
pub type Sampled32 = fracfun::SampledFunction<f32>;
