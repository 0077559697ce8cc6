//! Stable densities, the discretized killed generator and Dirichlet heat kernels.

mod dirichlet;
mod free;
mod grid;
mod stable;

pub use dirichlet::{
    apply_semigroup, colored_convolution_matrix, colored_kernel_convolution, dirichlet_fractional_kernel,
    dirichlet_kernel_subordination, kernel_floor, kernel_from_factors, kernel_matrix, killed_density, modal_factors, relaxation,
    KernelFloor,
};
pub use free::{fractional_free_kernel, green_l2_constant};
pub use grid::{build_discrete_generator, eigen_system, fractional_laplacian_constant, EigenSystem, SpaceGrid};
pub use stable::{stable_density, standard_density};

use crate::error::{domain, Result};
use crate::simulate::NoiseModel;

/// Parameters of ∂_t^β u = −ν(−Δ)^{α/2}u + λσ(u)Ḟ on B(0, R).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub d: usize,
    pub radius: f64,
    pub lambda: f64,
    pub noise: NoiseModel,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { alpha: 2.0, beta: 0.5, nu: 1.0, d: 1, radius: 1.0, lambda: 1.0, noise: NoiseModel::White }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let Self { alpha, beta, nu, d, radius, lambda, noise } = *self;
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("α ∈ (0, 2] violated (α = {alpha})"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("β ∈ (0, 1] violated (β = {beta})"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return domain(format!("ν > 0 violated (ν = {nu})"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("R > 0 violated (R = {radius})"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("λ ≥ 0 violated (λ = {lambda})"));
        }
        if !(1..=3).contains(&d) {
            return domain(format!("d ∈ {{1, 2, 3}} violated (d = {d})"));
        }
        let df = d as f64;
        match noise {
            NoiseModel::White => {
                let bound = 2f64.min(1.0 / beta) * alpha;
                if df >= bound {
                    return domain(format!("d < (2∧1/β)·α violated (d = {d}, bound {bound})"));
                }
            }
            NoiseModel::Riesz { gamma } => {
                let bound = alpha.min(df);
                if !(gamma > 0.0 && gamma < bound) {
                    return domain(format!("0 < γ < min(α, d) violated (γ = {gamma}, bound {bound})"));
                }
            }
        }
        Ok(())
    }

    /// The exponent dβ/α (white) or γβ/α (colored) of the lag singularity.
    pub fn lag_exponent(&self) -> f64 {
        match self.noise {
            NoiseModel::White => self.d as f64 * self.beta / self.alpha,
            NoiseModel::Riesz { gamma } => gamma * self.beta / self.alpha,
        }
    }
}
