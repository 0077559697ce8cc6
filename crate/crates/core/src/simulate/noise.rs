use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::kernels::SpaceGrid;

use super::NoiseModel;

/// Cell-averaged Riesz covariance |y − z|^{−γ} and its symmetric square root.
#[derive(Debug, Clone)]
pub struct RieszCovariance {
    pub grid: SpaceGrid,
    pub gamma: f64,
    pub c: DMatrix<f64>,
    pub factor: DMatrix<f64>,
}

/// h^{−2} ∬_{cell²} |y − z|^{−γ} dy dz.
pub fn riesz_diagonal(h: f64, gamma: f64) -> f64 {
    2.0 * h.powf(-gamma) / ((1.0 - gamma) * (2.0 - gamma))
}

pub fn build_riesz_covariance(grid: &SpaceGrid, gamma: f64) -> Result<RieszCovariance> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma = {gamma} must lie in (0, 1) for d = 1"));
    }
    let n = grid.n;
    let h = grid.h;
    let diag = riesz_diagonal(h, gamma);
    let c = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else {
            ((i as f64 - j as f64).abs() * h).powf(-gamma)
        }
    });
    let eig = SymmetricEigen::try_new(c.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Riesz covariance eigendecomposition did not converge".into()))?;
    let norm = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    if min < -1e-10 * norm {
        return Err(Error::Numerical(format!(
            "Riesz covariance not positive semidefinite: smallest eigenvalue {min:e}, norm {norm:e}"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let factor = v * DMatrix::from_diagonal(&roots) * v.transpose();
    let factor = (&factor + factor.transpose()) * 0.5;
    Ok(RieszCovariance { grid: grid.clone(), gamma, c, factor })
}

/// Noise discretized on a grid, ready for sampling.
#[derive(Debug, Clone)]
pub enum DiscreteNoise {
    White { grid: SpaceGrid },
    Colored(RieszCovariance),
}

impl DiscreteNoise {
    pub fn new(model: NoiseModel, grid: &SpaceGrid) -> Result<Self> {
        match model {
            NoiseModel::White => Ok(Self::White { grid: grid.clone() }),
            NoiseModel::Riesz { gamma } => Ok(Self::Colored(build_riesz_covariance(grid, gamma)?)),
        }
    }

    pub fn grid(&self) -> &SpaceGrid {
        match self {
            Self::White { grid } => grid,
            Self::Colored(c) => &c.grid,
        }
    }
}

/// Cell-integrated noise increments over a time step `dt`.
pub fn sample_noise_slice<R: Rng + ?Sized>(noise: &DiscreteNoise, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("dt = {dt} must be positive"));
    }
    let grid = noise.grid();
    let n = grid.n;
    let xi: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    match noise {
        DiscreteNoise::White { .. } => {
            let s = (dt * grid.h).sqrt();
            Ok(xi.into_iter().map(|z| z * s).collect())
        }
        DiscreteNoise::Colored(cov) => {
            let s = dt.sqrt() * grid.h;
            Ok((0..n).map(|i| s * (0..n).map(|k| cov.factor[(i, k)] * xi[k]).sum::<f64>()).collect())
        }
    }
}
