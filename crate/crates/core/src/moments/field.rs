use std::io::Write;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::kernels::SpaceGrid;

/// Second moments M(t_j, x_i) = values[j][i]·exp(log_scale[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField {
    pub times: Vec<f64>,
    pub grid: SpaceGrid,
    pub log_scale: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// ln M(t_j, x_i), kept where `values` underflows far below the peak.
    pub log_values: Vec<Vec<f64>>,
}

/// Splits natural logs into (values, scale) with max value in [1, e).
pub(crate) fn normalize(logs: &[f64]) -> (Vec<f64>, f64) {
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if top.is_finite() { top.floor() } else { 0.0 };
    (logs.iter().map(|l| (l - scale).exp()).collect(), scale)
}

pub(crate) fn ln_sum(logs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + logs.map(|l| (l - top).exp()).sum::<f64>().ln()
}

impl MomentField {
    pub(crate) fn from_logs(times: Vec<f64>, grid: SpaceGrid, log_values: Vec<Vec<f64>>) -> Self {
        let (values, log_scale) = log_values.iter().map(|l| normalize(l)).unzip();
        Self { times, grid, log_scale, values, log_values }
    }

    /// ln M(t_j, x_i); −∞ where the moment vanishes.
    pub fn ln_moment(&self, j: usize, i: usize) -> f64 {
        self.log_values[j][i]
    }

    /// M(t_j, x_i), which may overflow to infinity.
    pub fn moment(&self, j: usize, i: usize) -> f64 {
        self.ln_moment(j, i).exp()
    }

    /// ln sup_x M(t_j, x).
    pub fn ln_sup(&self, j: usize) -> f64 {
        self.log_values[j].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// ln ∫_B M(t_j, x) dx.
    pub fn ln_energy(&self, j: usize) -> f64 {
        self.grid.h.ln() + ln_sum(self.log_values[j].iter().cloned())
    }

    pub fn last(&self) -> usize {
        self.times.len() - 1
    }

    /// CSV with columns t, x, log_M.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,log_M")?;
        for (j, t) in self.times.iter().enumerate() {
            for (i, x) in self.grid.nodes.iter().enumerate() {
                writeln!(out, "{t:.16e},{x:.16e},{:.16e}", self.ln_moment(j, i))?;
            }
        }
        Ok(())
    }
}

/// Two-point moments K(t_j; y, z) = values[j][(y, z)]·exp(log_scale[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointField {
    pub times: Vec<f64>,
    pub grid: SpaceGrid,
    pub log_scale: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    pub log_values: Vec<DMatrix<f64>>,
}

impl TwoPointField {
    /// The one-point field K(t; x, x).
    pub fn diagonal(&self) -> MomentField {
        let logs = self.log_values.iter().map(|k| k.diagonal().iter().copied().collect()).collect();
        MomentField::from_logs(self.times.clone(), self.grid.clone(), logs)
    }

    pub fn ln_value(&self, j: usize, y: usize, z: usize) -> f64 {
        self.log_values[j][(y, z)]
    }
}
