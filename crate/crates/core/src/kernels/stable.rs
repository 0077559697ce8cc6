use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::fracfun::{gamma, ln_gamma, stable_subordinator_density};
use crate::quadrature::{integrate_breaks, integrate_to_inf, Tolerance};

fn check(alpha: f64, nu: f64, d: usize, t: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha = {alpha} must lie in (0, 2]"));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return domain(format!("nu = {nu} must be positive"));
    }
    if !(1..=3).contains(&d) {
        return domain(format!("d = {d} must be 1, 2 or 3"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be positive"));
    }
    Ok(())
}

/// Isotropic α-stable density p(t, x) with Fourier transform e^{−tν|ξ|^α}, at radial distance `r = |x|`.
pub fn stable_density(alpha: f64, nu: f64, d: usize, t: f64, r: f64) -> Result<f64> {
    check(alpha, nu, d, t)?;
    if r.is_nan() {
        return domain("x is NaN");
    }
    let scale = (t * nu).powf(1.0 / alpha);
    Ok(standard_density(alpha, d, r.abs() / scale)? / scale.powi(d as i32))
}

/// Density at unit time and unit diffusivity.
pub fn standard_density(alpha: f64, d: usize, r: f64) -> Result<f64> {
    let df = d as f64;
    if alpha == 2.0 {
        return Ok((4.0 * PI).powf(-0.5 * df) * (-0.25 * r * r).exp());
    }
    if alpha == 1.0 {
        let e = 0.5 * (df + 1.0);
        let c = gamma(e) / PI.powf(e);
        return Ok(c * (1.0 + r * r).powf(-e));
    }
    if d == 1 && alpha > 1.0 {
        if r <= 1.5 {
            return Ok(small_series(alpha, r));
        }
        if r >= 6.0 {
            if let Some(v) = tail_series(alpha, r) {
                return Ok(v);
            }
        }
        return zolotarev(alpha, r);
    }
    gaussian_mixture(alpha, d, r)
}

// (1/(πα)) Σ (−1)^k Γ((2k+1)/α)/(2k)! x^{2k}; entire for α > 1.
fn small_series(alpha: f64, x: f64) -> f64 {
    if x == 0.0 {
        return gamma(1.0 / alpha) / (PI * alpha);
    }
    let lx = x.ln();
    let mut sum = 0.0;
    let mut small = 0;
    for k in 0..400 {
        let kf = k as f64;
        let mag = (ln_gamma((2.0 * kf + 1.0) / alpha) - ln_gamma(2.0 * kf + 1.0) + 2.0 * kf * lx).exp();
        sum += if k % 2 == 0 { mag } else { -mag };
        if mag < 1e-18 * sum.abs() {
            small += 1;
            if small > 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum / (PI * alpha)
}

// (1/π) Σ_{k≥1} (−1)^{k+1} Γ(αk+1)/k! sin(παk/2) x^{−αk−1}; None if the terms stop shrinking first.
fn tail_series(alpha: f64, x: f64) -> Option<f64> {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let mag = (ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) - (alpha * kf + 1.0) * lx).exp();
        if mag > prev {
            return None;
        }
        let term = mag * (0.5 * PI * alpha * kf).sin();
        sum += if k % 2 == 1 { term } else { -term };
        if mag < 1e-17 * sum.abs() {
            return Some(sum / PI);
        }
        prev = mag;
    }
    None
}

// Zolotarev's integral for symmetric densities, 1 < α < 2.
fn zolotarev(alpha: f64, x: f64) -> Result<f64> {
    let am1 = alpha - 1.0;
    let e = alpha / am1;
    let xe = x.powf(e);
    let v = |th: f64| {
        let c = th.cos();
        (c / (alpha * th).sin()).powf(e) * (am1 * th).cos() / c
    };
    let f = |th: f64| {
        if th <= 0.0 || th >= 0.5 * PI {
            return 0.0;
        }
        let vv = v(th);
        let arg = xe * vv;
        if !arg.is_finite() || arg > 745.0 {
            0.0
        } else {
            vv * (-arg).exp()
        }
    };
    // V vanishes like (π/2 − θ)^{1/(α−1)}: the mass sits within ~x^{−α} of π/2 for large x.
    let mut pts = vec![0.0];
    let mut p = 0.5 * PI * 2f64.powi(-20);
    while p < 0.25 * PI {
        pts.push(p);
        p *= 2.0;
    }
    let floor = 1e-3 * x.powf(-alpha).min(1.0);
    let mut gap = 0.25 * PI;
    while gap > floor {
        pts.push(0.5 * PI - gap);
        gap *= 0.5;
    }
    pts.push(0.5 * PI);
    let est = integrate_breaks(f, &pts, Tolerance::new(0.0, 1e-12))?;
    Ok(alpha * x.powf(1.0 / am1) / (PI * am1.abs()) * est.value)
}

// p(1, r) = ∫ (4πu)^{−d/2} e^{−r²/(4u)} g_{α/2}(u) du.
fn gaussian_mixture(alpha: f64, d: usize, r: f64) -> Result<f64> {
    let b = 0.5 * alpha;
    let half_d = 0.5 * d as f64;
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let g = stable_subordinator_density(b, u).unwrap_or(f64::NAN);
        (4.0 * PI * u).powf(-half_d) * (-r * r / (4.0 * u)).exp() * g
    };
    let mut breaks = vec![0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0, 1e4];
    if r > 0.0 {
        breaks.push(0.25 * r * r);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(integrate_to_inf(f, 0.0, &breaks, Tolerance::new(0.0, 1e-10))?.value)
}
