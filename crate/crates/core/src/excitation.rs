//! λ-sweeps of the second moment and log–log fits of the noise-excitation index.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernels::{EigenSystem, ModelParams};
use crate::moments::{ColoredVolterra, MomentField, WhiteVolterra};
use crate::simulate::{simulate_mild, NoiseModel, SimConfig};

/// lim log log E_t(λ) / log λ: 2α/(α − dβ) for white noise, 2α/(α − γβ) for Riesz noise.
pub fn theoretical_index(alpha: f64, beta: f64, d: usize, noise: NoiseModel) -> Result<f64> {
    let s = match noise {
        NoiseModel::White => d as f64,
        NoiseModel::Riesz { gamma } => gamma,
    };
    let den = alpha - s * beta;
    if !(den > 0.0) || !(alpha > 0.0) {
        return domain(match noise {
            NoiseModel::White => format!("α − dβ > 0 violated (α = {alpha}, β = {beta}, d = {d})"),
            NoiseModel::Riesz { gamma } => format!("α − γβ > 0 violated (α = {alpha}, β = {beta}, γ = {gamma})"),
        });
    }
    Ok(2.0 * alpha / den)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// Deterministic second-moment equation on `nt` time steps; linear σ only.
    Volterra { nt: usize },
    /// Mild-form Monte Carlo; `config.horizon` is replaced by the sweep time.
    MonteCarlo(SimConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// (∫_B M(t,x) dx)^{1/2}.
    Energy,
    /// sup_x M(t,x).
    Sup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub backend: Backend,
    pub functional: Functional,
    /// Slope l of σ(u) = l·u for the Volterra backend.
    pub l_sigma: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { backend: Backend::Volterra { nt: 192 }, functional: Functional::Energy, l_sigma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationFit {
    pub lambdas: Vec<f64>,
    pub functional: Functional,
    pub log_values: Vec<f64>,
    /// Monte Carlo standard error of each log value (zero for the Volterra backend).
    pub log_stderr: Vec<f64>,
    /// Indices of λ used by the regression.
    pub window: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    /// Residuals of log log E_t on the window.
    pub residuals: Vec<f64>,
    pub theory: f64,
    pub t: f64,
}

impl ExcitationFit {
    pub fn relative_error(&self) -> f64 {
        self.slope / self.theory - 1.0
    }

    pub fn within(&self, tol: f64) -> bool {
        self.relative_error().abs() <= tol
    }
}

/// Per-λ second moment at the sweep time: ln M(t, x_i) and, for Monte Carlo, the standard error of M.
struct Snapshot {
    ln_m: Vec<f64>,
    se: Vec<f64>,
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 noise levels, got {}", lambdas.len())));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("noise levels must be strictly increasing".into()));
    }
    if !(lambdas[0] >= 1.0) || !lambdas[lambdas.len() - 1].is_finite() {
        return domain(format!("noise levels must be finite and ≥ 1 (first = {})", lambdas[0]));
    }
    Ok(())
}

fn from_field(m: &MomentField) -> Snapshot {
    let j = m.last();
    let n = m.grid.n;
    Snapshot { ln_m: (0..n).map(|i| m.ln_moment(j, i)).collect(), se: vec![0.0; n] }
}

fn snapshots(params: &ModelParams, es: &EigenSystem, u0: &[f64], t: f64, lambdas: &[f64], opts: &SweepOptions) -> Result<Vec<Snapshot>> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t > 0 violated (t = {t})"));
    }
    match &opts.backend {
        Backend::Volterra { nt } => match params.noise {
            NoiseModel::White => {
                let solver = WhiteVolterra::new(params, es, t, *nt)?;
                lambdas.par_iter().map(|&l| Ok(from_field(&solver.solve(l, opts.l_sigma, u0)?))).collect()
            }
            NoiseModel::Riesz { gamma } => {
                let solver = ColoredVolterra::new(params, es, gamma, t, *nt)?;
                lambdas.par_iter().map(|&l| Ok(from_field(&solver.solve(l, opts.l_sigma, u0)?.diagonal()))).collect()
            }
        },
        Backend::MonteCarlo(config) => {
            let config = SimConfig { horizon: t, ..config.clone() };
            lambdas
                .iter()
                .map(|&lambda| {
                    let est = simulate_mild(&ModelParams { lambda, ..*params }, es, u0, &config)?;
                    if est.replicates_used < 2 {
                        return Err(Error::Numerical(format!("all but {} replicates blew up at λ = {lambda}", est.replicates_used)));
                    }
                    let j = config.nt;
                    Ok(Snapshot { ln_m: est.mean[j].iter().map(|m| m.ln()).collect(), se: est.stderr[j].clone() })
                })
                .collect()
        }
    }
}

/// (log E, its standard error). The error of the energy uses Σ se_i, a bound that holds for correlated cells.
fn functional_value(s: &Snapshot, functional: Functional, h: f64) -> (f64, f64) {
    match functional {
        Functional::Energy => {
            let top = s.ln_m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = s.ln_m.iter().map(|l| (l - top).exp()).sum();
            let ln_e = top + (h * sum).ln();
            let se: f64 = s.se.iter().sum::<f64>() * h;
            (0.5 * ln_e, 0.5 * se * (-ln_e).exp())
        }
        Functional::Sup => {
            let (i, top) = s.ln_m.iter().cloned().enumerate().fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            (top, s.se[i] * (-top).exp())
        }
    }
}

fn regress(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("degenerate λ grid".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Least-squares fit of log log E against log λ over the top decade of the grid; points with
/// log E ≤ 0 are dropped from the window.
pub fn fit_index(lambdas: &[f64], log_values: &[f64], theory: f64) -> Result<(Vec<usize>, f64, f64, Vec<f64>)> {
    check_grid(lambdas)?;
    let top = lambdas[lambdas.len() - 1];
    let window: Vec<usize> = (0..lambdas.len())
        .filter(|&k| lambdas[k] >= top / 10.0 * (1.0 - 1e-12) && log_values[k] > 0.0 && log_values[k].is_finite())
        .collect();
    if window.len() < 4 {
        return Err(Error::Fit(format!("only {} usable points in the top decade of λ (need 4)", window.len())));
    }
    let xs: Vec<f64> = window.iter().map(|&k| lambdas[k].ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&k| log_values[k].ln()).collect();
    let (slope, intercept) = regress(&xs, &ys)?;
    if !slope.is_finite() || !(theory > 0.0) {
        return Err(Error::Fit(format!("non-finite slope {slope}")));
    }
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    Ok((window, slope, intercept, residuals))
}

/// Sweeps λ over `lambdas` and fits the excitation index of the chosen functional at time t.
pub fn excitation_sweep(
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    t: f64,
    lambdas: &[f64],
    opts: &SweepOptions,
) -> Result<ExcitationFit> {
    check_grid(lambdas)?;
    let theory = theoretical_index(params.alpha, params.beta, params.d, params.noise)?;
    let snaps = snapshots(params, es, u0, t, lambdas, opts)?;
    let (log_values, log_stderr): (Vec<f64>, Vec<f64>) =
        snaps.iter().map(|s| functional_value(s, opts.functional, es.grid.h)).unzip();
    let (window, slope, intercept, residuals) = fit_index(lambdas, &log_values, theory)?;
    Ok(ExcitationFit {
        lambdas: lambdas.to_vec(),
        functional: opts.functional,
        log_values,
        log_stderr,
        window,
        slope,
        intercept,
        residuals,
        theory,
        t,
    })
}

/// Geometric grid of `n` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo * (r * k as f64).exp() }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionReport {
    /// Grid nodes used as probes (duplicates removed).
    pub probes: Vec<f64>,
    pub slopes: Vec<f64>,
    /// max − min of the probe slopes.
    pub max_deviation: f64,
    /// Slope of the energy functional on the same sweep.
    pub energy_slope: f64,
    /// Slope at the probe nearest the centre.
    pub center_slope: f64,
    pub theory: f64,
}

/// Fits the index of M(t, x) pointwise at five probes spread over [−(R−ε), R−ε].
pub fn index_vs_position_check(
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    t: f64,
    epsilon: f64,
    lambdas: &[f64],
    opts: &SweepOptions,
) -> Result<PositionReport> {
    let r = es.grid.radius;
    if !(epsilon > 0.0 && epsilon < r) {
        return domain(format!("ε ∈ (0, R) violated (ε = {epsilon}, R = {r})"));
    }
    check_grid(lambdas)?;
    let theory = theoretical_index(params.alpha, params.beta, params.d, params.noise)?;
    let nodes = &es.grid.nodes;
    let nearest = |x: f64| (0..nodes.len()).min_by(|&a, &b| (nodes[a] - x).abs().total_cmp(&(nodes[b] - x).abs())).unwrap_or(0);
    let a = r - epsilon;
    let mut idx: Vec<usize> = if a < es.grid.h {
        vec![nearest(0.0)]
    } else {
        [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|f| nearest(f * a)).collect()
    };
    idx.dedup();
    let snaps = snapshots(params, es, u0, t, lambdas, opts)?;
    let mut slopes = Vec::with_capacity(idx.len());
    for &i in &idx {
        let logs: Vec<f64> = snaps.iter().map(|s| s.ln_m[i]).collect();
        slopes.push(fit_index(lambdas, &logs, theory)?.1);
    }
    let energy: Vec<f64> = snaps.iter().map(|s| functional_value(s, Functional::Energy, es.grid.h).0).collect();
    let energy_slope = fit_index(lambdas, &energy, theory)?.1;
    let center = nearest(0.0);
    let center_slope = slopes[idx.iter().position(|&i| i == center).unwrap_or(idx.len() / 2)];
    let max = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PositionReport {
        probes: idx.iter().map(|&i| nodes[i]).collect(),
        slopes,
        max_deviation: max - min,
        energy_slope,
        center_slope,
        theory,
    })
}
