//! Monte Carlo simulation of the mild solution under white and Riesz-colored noise.

mod ensemble;
mod mild;
mod noise;

pub use ensemble::{read_ensemble_header, write_ensemble};
pub use mild::{simulate_markov_reference, simulate_mild, simulate_replicate, MomentEstimate, SimConfig};
pub use noise::{build_riesz_covariance, riesz_diagonal, sample_noise_slice, DiscreteNoise, RieszCovariance};

use crate::error::{domain, Result};

/// Spatial correlation of the driving noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    White,
    /// f(x, y) = |x − y|^{−γ}.
    Riesz { gamma: f64 },
}

/// Lipschitz nonlinearity with σ(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum Sigma {
    Linear(f64),
    /// Piecewise-linear through `(xs[k], ys[k])`, extended linearly beyond the ends.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

impl Sigma {
    pub fn validate(&self) -> Result<()> {
        match self {
            Sigma::Linear(l) if l.is_finite() => Ok(()),
            Sigma::Linear(l) => domain(format!("sigma slope {l} is not finite")),
            Sigma::Table { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return domain("sigma table needs at least two (x, y) pairs of equal length");
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return domain("sigma table abscissae must be strictly increasing");
                }
                if ys.iter().chain(xs).any(|v| !v.is_finite()) {
                    return domain("sigma table values must be finite");
                }
                if self.eval(0.0).abs() > 1e-12 {
                    return domain("σ(0) = 0 violated by sigma table");
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Sigma::Linear(l) => l * u,
            Sigma::Table { xs, ys } => {
                let n = xs.len();
                let j = xs.partition_point(|&x| x <= u).clamp(1, n - 1) - 1;
                let s = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
                ys[j] + s * (u - xs[j])
            }
        }
    }

    /// Lipschitz constant (slope bound).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Sigma::Linear(l) => l.abs(),
            Sigma::Table { xs, ys } => xs
                .windows(2)
                .zip(ys.windows(2))
                .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max),
        }
    }
}
