use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::kernels::{apply_semigroup, EigenSystem, ModelParams};
use crate::simulate::{build_riesz_covariance, NoiseModel};

use super::field::TwoPointField;
use super::step::{ln_add, ln_cell_mean, lag_cell_nodes, newest_cell_products, newest_cell_solve, MAX_TABLE};

/// Largest grid accepted by the two-point solver.
pub const MAX_TWO_POINT_NODES: usize = 48;

const LAG_ORDER: usize = 6;

/// Lag tables for the two-point equation
/// K(t;y,z) = (𝒢u0)(y)(𝒢u0)(z) + λ²l² ∫₀^t ∬ G_B(t−s,y,w) G_B(t−s,z,w′) f(w,w′) K(s;w,w′) dw dw′ ds,
/// kept in modal form: the history term is Φ (Σ_l w_l ∘ h²Φᵀ(C ∘ K̄)Φ) Φᵀ.
#[derive(Debug, Clone)]
pub struct ColoredVolterra<'a> {
    es: &'a EigenSystem,
    beta: f64,
    kappa: f64,
    dt: f64,
    nt: usize,
    cov: DMatrix<f64>,
    /// lag[l − 2](n, m) = ∫_{(l−1)Δt}^{lΔt} E_n(τ) E_m(τ) dτ.
    lag: Vec<DMatrix<f64>>,
    /// Newest-cell integral of h² G C G, carried by the per-pair law a(y,z) τ^{−γβ/α}.
    newest: DMatrix<f64>,
}

impl<'a> ColoredVolterra<'a> {
    pub fn new(params: &ModelParams, es: &'a EigenSystem, gamma: f64, horizon: f64, nt: usize) -> Result<Self> {
        let mut p = *params;
        p.noise = NoiseModel::Riesz { gamma };
        p.validate()?;
        if p.d != 1 {
            return domain(format!("the moment solver works on d = 1 grids (d = {})", p.d));
        }
        if !(gamma < 1.0) {
            return domain(format!("0 < γ < min(α, 1) violated (γ = {gamma})"));
        }
        let n = es.len();
        if n > MAX_TWO_POINT_NODES {
            return domain(format!("two-point solver needs n ≤ {MAX_TWO_POINT_NODES} (n = {n})"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || nt == 0 {
            return domain(format!("need T > 0 and nt ≥ 1 (T = {horizon}, nt = {nt})"));
        }
        if nt.saturating_mul(2 * n * n) > MAX_TABLE {
            return domain(format!("two-point tables of {nt}·2·{n}² entries exceed the limit {MAX_TABLE}"));
        }
        let dt = horizon / nt as f64;
        let cov = build_riesz_covariance(&es.grid, gamma)?.c;
        let mut lag = Vec::with_capacity(nt.saturating_sub(1));
        for l in 2..=nt {
            let mut w = DMatrix::zeros(n, n);
            for (wt, e) in lag_cell_nodes(es, p.beta, dt, l, LAG_ORDER)? {
                let e = DVector::from_vec(e);
                w.ger(wt, &e, &e, 1.0);
            }
            lag.push(w);
        }
        let w1 = newest_cell_products(es, p.beta, dt)?;
        let h2 = es.grid.h * es.grid.h;
        let pc = es.phi.tr_mul(&cov) * &es.phi * h2;
        let mut newest = &es.phi * w1.component_mul(&pc) * es.phi.transpose();
        symmetrize(&mut newest);
        newest.iter_mut().for_each(|v| *v = v.max(0.0));
        Ok(Self { es, beta: p.beta, kappa: p.lag_exponent(), dt, nt, cov, lag, newest })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Two-point moments for noise level λ and σ(u) = l·u.
    pub fn solve(&self, lambda: f64, l_sigma: f64, u0: &[f64]) -> Result<TwoPointField> {
        let n = self.es.len();
        if u0.len() != n {
            return domain(format!("u0 has {} values, grid has {n}", u0.len()));
        }
        if u0.iter().any(|v| !(*v >= 0.0)) {
            return domain("the two-point solver needs u0 ≥ 0");
        }
        if !(lambda >= 0.0 && lambda.is_finite() && l_sigma.is_finite()) {
            return domain(format!("λ ≥ 0 and finite l required (λ = {lambda}, l = {l_sigma})"));
        }
        let c = (lambda * l_sigma).powi(2);
        let rho = 1.0 - self.kappa;
        let h2 = self.es.grid.h * self.es.grid.h;
        let lnu: Vec<f64> = u0.iter().map(|v| v.ln()).collect();
        let mut logs = vec![DMatrix::from_fn(n, n, |y, z| lnu[y] + lnu[z])];
        let mut log_scale = vec![top_scale(&logs[0])];
        // h²Φᵀ(C ∘ K̄_m)Φ for each finished cell, in units of e^{log_scale[m+1]}.
        let mut cells: Vec<DMatrix<f64>> = Vec::with_capacity(self.nt);
        for step in 1..=self.nt {
            let prev_scale = log_scale[step - 1];
            let det = apply_semigroup(self.es, self.beta, step as f64 * self.dt, u0)?;
            let mut hist = DMatrix::zeros(n, n);
            if c > 0.0 && step >= 2 {
                let mut acc = DMatrix::zeros(n, n);
                for l in 2..=step {
                    let m = step - l;
                    let f = (log_scale[m + 1] - prev_scale).exp();
                    if f == 0.0 {
                        continue;
                    }
                    acc += self.lag[l - 2].component_mul(&cells[m]) * f;
                }
                hist = &self.es.phi * acc * self.es.phi.transpose() * c;
            }
            let prev = &logs[step - 1];
            let mut next = DMatrix::from_element(n, n, f64::NEG_INFINITY);
            for y in 0..n {
                for z in y..n {
                    let dd = det[y] * det[z];
                    let hs = 0.5 * (hist[(y, z)] + hist[(z, y)]);
                    let ln_rhs = ln_add(if dd > 0.0 { dd.ln() } else { f64::NEG_INFINITY }, hs.ln() + prev_scale);
                    let v = newest_cell_solve(c * self.newest[(y, z)], prev[(y, z)], ln_rhs, rho)?;
                    next[(y, z)] = v;
                    next[(z, y)] = v;
                }
            }
            let s = top_scale(&next);
            let mean = DMatrix::from_fn(n, n, |y, z| (ln_cell_mean(prev[(y, z)], next[(y, z)]) - s).exp());
            let mut a = self.es.phi.tr_mul(&self.cov.component_mul(&mean)) * &self.es.phi * h2;
            symmetrize(&mut a);
            cells.push(a);
            logs.push(next);
            log_scale.push(s);
        }
        let values = logs.iter().zip(&log_scale).map(|(l, s)| l.map(|v| (v - s).exp())).collect();
        Ok(TwoPointField {
            times: (0..=self.nt).map(|j| j as f64 * self.dt).collect(),
            grid: self.es.grid.clone(),
            log_scale,
            values,
            log_values: logs,
        })
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn top_scale(logs: &DMatrix<f64>) -> f64 {
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top.is_finite() {
        top.floor()
    } else {
        0.0
    }
}

/// Solves the colored-noise two-point Volterra equation with σ(u) = l_sigma·u at λ = params.lambda.
pub fn second_moment_colored(
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    l_sigma: f64,
    gamma: f64,
    horizon: f64,
    nt: usize,
) -> Result<TwoPointField> {
    ColoredVolterra::new(params, es, gamma, horizon, nt)?.solve(params.lambda, l_sigma, u0)
}
