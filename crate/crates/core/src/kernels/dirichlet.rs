use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::fracfun::{inverse_subordinator_density, mittag_leffler};
use crate::quadrature::{integrate_to_inf, Tolerance};
use crate::simulate::build_riesz_covariance;

use super::grid::EigenSystem;

const CLIP: f64 = 1e-12;

fn check_time(beta: f64, t: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta = {beta} must lie in (0, 1]"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be positive"));
    }
    Ok(())
}

fn clip(v: f64) -> f64 {
    if v < 0.0 && v > -CLIP {
        0.0
    } else {
        v
    }
}

/// E_β(−μ t^β), or e^{−μt} for β = 1.
pub fn relaxation(beta: f64, mu: f64, t: f64) -> Result<f64> {
    if beta == 1.0 {
        return Ok((-mu * t).exp());
    }
    mittag_leffler(beta, -mu * t.powf(beta))
}

/// E_β(−μ_n t^β) for every mode.
pub fn modal_factors(es: &EigenSystem, beta: f64, t: f64) -> Result<Vec<f64>> {
    check_time(beta, t)?;
    es.mu.iter().map(|&m| relaxation(beta, m, t)).collect()
}

/// G_B(t, x_i, x_j) = Σ_{n<N} E_β(−μ_n t^β) φ_n(x_i) φ_n(x_j).
pub fn dirichlet_fractional_kernel(es: &EigenSystem, beta: f64, t: f64, i: usize, j: usize, truncation: usize) -> Result<f64> {
    check_time(beta, t)?;
    let n = es.len();
    if i >= n || j >= n {
        return domain(format!("node indices ({i}, {j}) outside grid of {n}"));
    }
    if truncation == 0 || truncation > n {
        return domain(format!("truncation {truncation} must lie in 1..={n}"));
    }
    // Sum in a fixed order so that G(x, y) and G(y, x) are bitwise equal.
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    let mut s = 0.0;
    for k in 0..truncation {
        s += relaxation(beta, es.mu[k], t)? * (es.phi[(a, k)] * es.phi[(b, k)]);
    }
    Ok(clip(s))
}

/// Full kernel matrix Φ diag(E_β(−μ t^β)) Φᵀ.
pub fn kernel_matrix(es: &EigenSystem, beta: f64, t: f64) -> Result<DMatrix<f64>> {
    let e = modal_factors(es, beta, t)?;
    Ok(kernel_from_factors(es, &e))
}

pub fn kernel_from_factors(es: &EigenSystem, factors: &[f64]) -> DMatrix<f64> {
    let scaled = &es.phi * DMatrix::from_diagonal(&DVector::from_column_slice(factors));
    let mut g = scaled * es.phi.transpose();
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = clip(0.5 * (g[(i, j)] + g[(j, i)]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g[(i, i)] = clip(g[(i, i)]);
    }
    g
}

/// Killed semigroup p_B(s, x_i, x_j) = Σ e^{−μ_n s} φ_n(x_i) φ_n(x_j).
pub fn killed_density(es: &EigenSystem, s: f64, i: usize, j: usize) -> f64 {
    es.mu
        .iter()
        .enumerate()
        .map(|(k, &m)| (-m * s).exp() * es.phi[(i, k)] * es.phi[(j, k)])
        .sum()
}

/// G_B(t, x_i, x_j) = ∫₀^∞ p_B(s, x_i, x_j) f_{E_t}(s) ds.
pub fn dirichlet_kernel_subordination(es: &EigenSystem, beta: f64, t: f64, i: usize, j: usize) -> Result<f64> {
    check_time(beta, t)?;
    let n = es.len();
    if i >= n || j >= n {
        return domain(format!("node indices ({i}, {j}) outside grid of {n}"));
    }
    if beta == 1.0 {
        return Ok(clip(killed_density(es, t, i, j)));
    }
    let coef: Vec<f64> = (0..n).map(|k| es.phi[(i, k)] * es.phi[(j, k)]).collect();
    let mu_max = es.mu[n - 1];
    let mu_min = es.mu[0];
    let mut breaks = Vec::new();
    let mut s = 0.1 / mu_max;
    while s < 50.0 / mu_min {
        breaks.push(s);
        s *= 4.0;
    }
    let tb = t.powf(beta);
    breaks.extend([0.01 * tb, 0.1 * tb, tb, 10.0 * tb]);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut failure = None;
    let est = integrate_to_inf(
        |s: f64| {
            let pb: f64 = es.mu.iter().zip(&coef).map(|(&m, &c)| (-m * s).exp() * c).sum();
            match inverse_subordinator_density(beta, t, s) {
                Ok(f) => pb * f,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        &breaks,
        Tolerance::new(0.0, 1e-10),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(clip(est.value))
}

/// (𝒢_B u0)_t = Σ E_β(−μ_n t^β) ⟨u0, φ_n⟩ φ_n.
pub fn apply_semigroup(es: &EigenSystem, beta: f64, t: f64, u0: &[f64]) -> Result<Vec<f64>> {
    if u0.len() != es.len() {
        return domain(format!("u0 has {} values, grid has {}", u0.len(), es.len()));
    }
    let e = modal_factors(es, beta, t)?;
    let coef: Vec<f64> = es.project(u0).iter().zip(&e).map(|(c, e)| c * e).collect();
    Ok(es.synthesize(&coef))
}

/// h² G_B(t) C G_B(t) for a cell covariance `cov`.
pub fn colored_convolution_matrix(es: &EigenSystem, beta: f64, t: f64, cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = kernel_matrix(es, beta, t)?;
    let h2 = es.grid.h * es.grid.h;
    let m = &g * cov * &g * h2;
    Ok((&m + m.transpose()) * 0.5)
}

/// ∫∫ G_B(t,x_i,w) G_B(t,x_j,z) |w−z|^{−γ} dw dz on the grid.
pub fn colored_kernel_convolution(es: &EigenSystem, beta: f64, gamma: f64, t: f64, i: usize, j: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma = {gamma} must lie in (0, 1) for d = 1"));
    }
    let n = es.len();
    if i >= n || j >= n {
        return domain(format!("node indices ({i}, {j}) outside grid of {n}"));
    }
    let cov = build_riesz_covariance(&es.grid, gamma)?;
    let m = colored_convolution_matrix(es, beta, t, &cov.c)?;
    Ok(m[(i, j)])
}

/// Fitted near-diagonal floor G_B(t,x,y) ≥ C t^{−β/α} for t ≤ t₀, |x − y| < t^{β/α}, |x|, |y| ≤ 0.75R (d = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFloor {
    pub c: f64,
    pub t0: f64,
    /// (t, t^{β/α} min G_B) at every dyadic t tried.
    pub samples: Vec<(f64, f64)>,
}

/// Scans dyadic t = t_max 2^{−k} ≥ t_min. t₀ is the largest t below which every scaled minimum stays
/// within a factor 2 of the value at the smallest t, and C is the least scaled minimum up to t₀.
pub fn kernel_floor(es: &EigenSystem, alpha: f64, beta: f64, t_min: f64, t_max: f64) -> Result<KernelFloor> {
    if !(t_min > 0.0 && t_max >= t_min) {
        return domain(format!("need 0 < t_min ≤ t_max (t_min = {t_min}, t_max = {t_max})"));
    }
    let r = es.grid.radius;
    let nodes = &es.grid.nodes;
    let inner: Vec<usize> = (0..es.len()).filter(|&i| nodes[i].abs() <= 0.75 * r).collect();
    let mut ts = vec![t_max];
    while ts[ts.len() - 1] * 0.5 >= t_min {
        ts.push(ts[ts.len() - 1] * 0.5);
    }
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let g = kernel_matrix(es, beta, t)?;
        let reach = t.powf(beta / alpha);
        let mut m = f64::INFINITY;
        for &i in &inner {
            for &j in &inner {
                if (nodes[i] - nodes[j]).abs() < reach {
                    m = m.min(g[(i, j)]);
                }
            }
        }
        samples.push((t, m * reach));
    }
    samples.reverse();
    let base = samples[0].1;
    let mut k = 0;
    while k + 1 < samples.len() && samples[k + 1].1 >= 0.5 * base {
        k += 1;
    }
    let c = samples[..=k].iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(KernelFloor { c, t0: samples[k].0, samples })
}
