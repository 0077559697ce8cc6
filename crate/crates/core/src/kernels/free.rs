use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::fracfun::{gamma, inverse_subordinator_density, mittag_leffler, rgamma};
use crate::quadrature::{integrate_breaks, integrate_to_inf, Tolerance};

use super::stable::stable_density;

/// Free-space time-fractional kernel G_t(x) = ∫₀^∞ p(s, x) f_{E_t}(s) ds at radial distance `r`.
/// `beta = 1` returns p(t, x). At the origin the kernel is infinite when d ≥ α.
pub fn fractional_free_kernel(alpha: f64, beta: f64, nu: f64, d: usize, t: f64, r: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta = {beta} must lie in (0, 1]"));
    }
    // Validates alpha, nu, d, t.
    let p_t = stable_density(alpha, nu, d, t, r)?;
    if beta == 1.0 {
        return Ok(p_t);
    }
    let r = r.abs();
    if r == 0.0 && d as f64 >= alpha {
        return Ok(f64::INFINITY);
    }
    let tb = t.powf(beta);
    let mut breaks: Vec<f64> = [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0].iter().map(|k| k * tb).collect();
    if r > 0.0 {
        let sx = r.powf(alpha) / nu;
        breaks.extend([0.1 * sx, sx, 10.0 * sx]);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut failure = None;
    let est = integrate_to_inf(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let f = inverse_subordinator_density(beta, t, s);
            let p = stable_density(alpha, nu, d, s, r);
            match (p, f) {
                (Ok(p), Ok(f)) => p * f,
                (Err(e), _) | (_, Err(e)) => {
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
    Ok(est.value)
}

/// C* in ∫ G_t(x)² dx = C* t^{−βd/α}.
pub fn green_l2_constant(alpha: f64, beta: f64, nu: f64, d: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha = {alpha} must lie in (0, 2]"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta = {beta} must lie in (0, 1]"));
    }
    if !(nu > 0.0) {
        return domain(format!("nu = {nu} must be positive"));
    }
    if !(1..=3).contains(&d) {
        return domain(format!("d = {d} must be 1, 2 or 3"));
    }
    let df = d as f64;
    if df >= 2.0 * alpha {
        return domain(format!("d < 2α violated (d = {d}, α = {alpha}): the L² integral diverges"));
    }
    // With z = w^{1/p}, p = d/α: ∫ z^{p−1} E_β(−z)² dz = (1/p) ∫ E_β(−w^{1/p})² dw.
    let p = df / alpha;
    // Numerical part on [0, W] with W^{1/p} = 10⁴; beyond W the algebraic expansion
    // E_β(−z) = Σ_k (−1)^{k+1} z^{−k}/Γ(1−βk) is squared and integrated termwise.
    let cut = 1e4f64.powf(p);
    let mut failure = None;
    let mut breaks = vec![0.0];
    let mut w = 1e-4;
    while w < cut {
        breaks.push(w);
        w *= 10.0;
    }
    breaks.push(cut);
    let est = integrate_breaks(
        |w: f64| match mittag_leffler(beta, -w.powf(1.0 / p)) {
            Ok(e) => e * e,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        },
        &breaks,
        Tolerance::new(0.0, 1e-11),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let terms = 10;
    let c: Vec<f64> = (1..=terms)
        .map(|k| {
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            if beta == 1.0 {
                0.0
            } else {
                s * rgamma(1.0 - beta * k as f64)
            }
        })
        .collect();
    let mut tail = 0.0;
    for m in 2..=2 * terms {
        let dm: f64 = (1..m).filter(|&k| k <= terms && m - k <= terms).map(|k| c[k - 1] * c[m - k - 1]).sum();
        let e = m as f64 / p;
        tail += dm * cut.powf(1.0 - e) / (e - 1.0);
    }
    let pref = nu.powf(-df / alpha) * 2.0 * PI.powf(0.5 * df) / (alpha * gamma(0.5 * df)) * (2.0 * PI).powf(-df);
    Ok(pref * (est.value + tail) / p)
}
