use crate::error::{domain, Result};
use crate::fracfun::{gamma, uniform_grid, SampledFunction};
use crate::quadrature::gauss_legendre;
use crate::real::Real;

/// h^{−ρ} ∫_{ph}^{(p+1)h} τ^{ρ−1} ℓ(τ) dτ for the two hat functions ℓ on the cell, as
/// (weight of the far end τ = (p+1)h, weight of the near end τ = ph).
fn hat_weights<T: Real>(rho: T, p: usize, gl: &(Vec<f64>, Vec<f64>)) -> (T, T) {
    let one = T::one();
    let pf = T::c(p as f64);
    if p < 16 {
        let pw = |x: T, e: T| if x == T::zero() { T::zero() } else { x.powf(e) };
        let r1 = rho + one;
        let m0 = (pw(pf + one, rho) - pw(pf, rho)) / rho;
        let m1 = (pw(pf + one, r1) - pw(pf, r1)) / r1;
        let far = m1 - pf * m0;
        return (far, m0 - far);
    }
    let (mut far, mut near) = (T::zero(), T::zero());
    for (x, w) in gl.0.iter().zip(&gl.1) {
        let u = T::c(0.5 * (x + 1.0));
        let k = T::c(0.5 * w) * (pf + u).powf(rho - one);
        far += k * u;
        near += k * (one - u);
    }
    (far, near)
}

/// Equality case f(t) = c1 + κ ∫₀^t (t−s)^{ρ−1} f(s) ds of the renewal inequality, by
/// product integration against piecewise-linear f on a uniform grid of `nt` steps, with one
/// Richardson step against the half-step solution (error order min(1 + ρ, 2)).
pub fn renewal_volterra_solve<T: Real>(c1: T, kappa: T, rho: T, horizon: T, nt: usize) -> Result<SampledFunction<T>> {
    if !(rho > T::zero()) {
        return domain(format!("ρ > 0 violated (ρ = {rho})"));
    }
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return domain(format!("κ ≥ 0 violated (κ = {kappa})"));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() || nt == 0 {
        return domain(format!("need T > 0 and nt ≥ 1 (T = {horizon}, nt = {nt})"));
    }
    let coarse = product_trapezoid(c1, kappa, rho, horizon, nt)?;
    let fine = product_trapezoid(c1, kappa, rho, horizon, 2 * nt)?;
    let order = (T::one() + rho).min(T::c(2.0));
    let r = T::one() / (T::c(2.0).powf(order) - T::one());
    let f = (0..=nt).map(|j| fine[2 * j] + (fine[2 * j] - coarse[j]) * r).collect();
    SampledFunction::new(uniform_grid(horizon, nt + 1), f)
}

fn product_trapezoid<T: Real>(c1: T, kappa: T, rho: T, horizon: T, nt: usize) -> Result<Vec<T>> {
    let h = horizon / T::c(nt as f64);
    let gl = gauss_legendre(12);
    let w: Vec<(T, T)> = (0..nt).map(|p| hat_weights(rho, p, &gl)).collect();
    let scale = kappa * h.powf(rho);
    let den = T::one() - scale * w[0].1;
    if !(den > T::zero()) {
        return domain(format!("time step too coarse: κ h^ρ/(ρ(ρ+1)) ≥ 1 (h = {h})"));
    }
    let mut f = vec![c1];
    for n in 1..=nt {
        // Cell j = [t_j, t_{j+1}] sits at lag p = n − j − 1.
        let mut acc = w[n - 1].0 * f[0];
        for j in 1..n {
            acc += (w[n - j - 1].0 + w[n - j].1) * f[j];
        }
        f.push((c1 + scale * acc) / den);
    }
    Ok(f)
}

/// Growth-rate scale (Γ(ρ)κ)^{1/ρ} of the renewal bounds.
pub fn renewal_growth_exponent(kappa: f64, rho: f64) -> f64 {
    (gamma(rho) * kappa).powf(1.0 / rho)
}

/// Least-squares slope of ln f over the nodes with t ≥ `from`.
pub fn late_growth_rate(f: &SampledFunction<f64>, from: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        f.times().iter().zip(f.values()).filter(|(t, v)| **t >= from && **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 2 {
        return domain(format!("fewer than two positive samples after t = {from}"));
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
