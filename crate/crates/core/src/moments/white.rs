use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::kernels::{apply_semigroup, EigenSystem, ModelParams};
use crate::simulate::NoiseModel;

use super::field::{normalize, MomentField};
use super::step::{ln_add, ln_cell_mean, lag_cell_nodes, newest_cell_products, newest_cell_solve, MAX_TABLE};

const LAG_ORDER: usize = 6;

/// Time-integrated kernel tables for M(t,x) = |(𝒢_B u0)_t(x)|² + λ²l² ∫₀^t ∫_B G_B(t−s,x,y)² M(s,y) dy ds.
/// Built once per (grid, β, T, nt) and reused across λ.
#[derive(Debug, Clone)]
pub struct WhiteVolterra<'a> {
    es: &'a EigenSystem,
    beta: f64,
    kappa: f64,
    dt: f64,
    nt: usize,
    /// lag[l − 2](i, k) = h ∫_{(l−1)Δt}^{lΔt} G_B(τ, x_i, y_k)² dτ for l ≥ 2.
    lag: Vec<DMatrix<f64>>,
    /// h Σ_k ∫₀^{Δt} G_B(τ, x_i, y_k)² dτ, carried by the law q_i τ^{−κ} on the newest cell.
    newest: Vec<f64>,
}

impl<'a> WhiteVolterra<'a> {
    pub fn new(params: &ModelParams, es: &'a EigenSystem, horizon: f64, nt: usize) -> Result<Self> {
        let mut p = *params;
        p.noise = NoiseModel::White;
        p.validate()?;
        if p.d != 1 {
            return domain(format!("the moment solver works on d = 1 grids (d = {})", p.d));
        }
        let kappa = p.lag_exponent();
        if kappa >= 1.0 {
            return domain(format!("dβ/α < 1 violated (dβ/α = {kappa})"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || nt == 0 {
            return domain(format!("need T > 0 and nt ≥ 1 (T = {horizon}, nt = {nt})"));
        }
        let n = es.len();
        if nt.saturating_mul(n * n) > MAX_TABLE {
            return domain(format!("lag table of {nt}·{n}² entries exceeds the limit {MAX_TABLE}"));
        }
        let dt = horizon / nt as f64;
        let h = es.grid.h;
        let mut lag = Vec::with_capacity(nt.saturating_sub(1));
        for l in 2..=nt {
            let mut w = DMatrix::zeros(n, n);
            for (wt, e) in lag_cell_nodes(es, p.beta, dt, l, LAG_ORDER)? {
                let g = &es.phi * DMatrix::from_diagonal(&DVector::from_vec(e)) * es.phi.transpose();
                w += g.component_mul(&g) * (wt * h);
            }
            lag.push(w);
        }
        let prod = newest_cell_products(es, p.beta, dt)?;
        let newest = (0..n).map(|i| (0..n).map(|m| es.phi[(i, m)].powi(2) * prod[(m, m)]).sum::<f64>()).collect();
        Ok(Self { es, beta: p.beta, kappa, dt, nt, lag, newest })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Second moment for noise level λ and σ(u) = l·u.
    pub fn solve(&self, lambda: f64, l_sigma: f64, u0: &[f64]) -> Result<MomentField> {
        let n = self.es.len();
        if u0.len() != n {
            return domain(format!("u0 has {} values, grid has {n}", u0.len()));
        }
        if !(lambda >= 0.0 && lambda.is_finite() && l_sigma.is_finite()) {
            return domain(format!("λ ≥ 0 and finite l required (λ = {lambda}, l = {l_sigma})"));
        }
        let c = (lambda * l_sigma).powi(2);
        let rho = 1.0 - self.kappa;
        let mut logs: Vec<Vec<f64>> = vec![u0.iter().map(|u| (u * u).ln()).collect()];
        let mut log_scale = vec![normalize(&logs[0]).1];
        // Cell means of M over [t_m, t_{m+1}] in units of e^{log_scale[m+1]}.
        let mut cells: Vec<DVector<f64>> = Vec::with_capacity(self.nt);
        for step in 1..=self.nt {
            let prev_scale = log_scale[step - 1];
            let det = apply_semigroup(self.es, self.beta, step as f64 * self.dt, u0)?;
            let mut hist = DVector::zeros(n);
            if c > 0.0 {
                for l in 2..=step {
                    let m = step - l;
                    let f = (log_scale[m + 1] - prev_scale).exp();
                    if f == 0.0 {
                        continue;
                    }
                    hist.gemv(c * f, &self.lag[l - 2], &cells[m], 1.0);
                }
            }
            let prev = &logs[step - 1];
            let next = (0..n)
                .map(|i| {
                    let ln_rhs = ln_add((det[i] * det[i]).ln(), hist[i].ln() + prev_scale);
                    newest_cell_solve(c * self.newest[i], prev[i], ln_rhs, rho)
                })
                .collect::<Result<Vec<f64>>>()?;
            let s = normalize(&next).1;
            cells.push(DVector::from_iterator(n, (0..n).map(|i| (ln_cell_mean(prev[i], next[i]) - s).exp())));
            logs.push(next);
            log_scale.push(s);
        }
        Ok(MomentField::from_logs((0..=self.nt).map(|j| j as f64 * self.dt).collect(), self.es.grid.clone(), logs))
    }
}

/// Solves the white-noise second-moment Volterra equation with σ(u) = l_sigma·u at λ = params.lambda.
pub fn second_moment_white(
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    l_sigma: f64,
    horizon: f64,
    nt: usize,
) -> Result<MomentField> {
    WhiteVolterra::new(params, es, horizon, nt)?.solve(params.lambda, l_sigma, u0)
}
