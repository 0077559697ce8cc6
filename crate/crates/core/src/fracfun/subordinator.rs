use crate::error::{domain, Result};
use crate::quadrature::{integrate_breaks, Tolerance};
use crate::real::Real;

use super::gamma::ln_gamma;

/// ln(sin x / x), accurate near zero.
fn ln_sinc<T: Real>(x: T) -> T {
    if x.abs() < T::c(0.5) {
        let x2 = x * x;
        let coef = [
            1.0 / 6.0,
            1.0 / 180.0,
            1.0 / 2835.0,
            1.0 / 37800.0,
            1.0 / 467775.0,
            691.0 / 3831077250.0,
            2.0 / 127702575.0,
            3617.0 / 2605132530000.0,
            43867.0 / 350813659321125.0,
        ];
        let mut acc = T::zero();
        for &c in coef.iter().rev() {
            acc = (acc + T::c(c)) * x2;
        }
        -acc
    } else {
        (x.sin() / x).ln()
    }
}

/// Large-argument series (1/π) Σ (−1)^{k+1} Γ(βk+1)/k! sin(πβk) u^{−βk−1}, without the u^{−1} factor.
fn tail_series<T: Real>(beta: T, u_pow_beta: T) -> T {
    let ln_v = u_pow_beta.ln();
    let mut sum = T::zero();
    let mut small = 0;
    for k in 1..2000 {
        let kf = T::c(k as f64);
        let mag = (ln_gamma(beta * kf + T::one()) - ln_gamma(kf + T::one()) - kf * ln_v).exp();
        let s = (T::PI() * beta * kf).sin();
        let term = if k % 2 == 1 { mag * s } else { -mag * s };
        sum += term;
        if mag <= T::epsilon() * sum.abs() * T::c(0.01) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum / T::PI()
}

fn tail_regime<T: Real>(beta: T, u: T) -> bool {
    u.powf(beta) >= T::c(8.0)
}

/// Density g_β(u) of the β-stable subordinator at time 1 (Laplace transform e^{−s^β}).
pub fn stable_subordinator_density<T: Real>(beta: T, u: T) -> Result<T> {
    if !(beta > T::zero() && beta < T::one()) {
        return domain(format!("beta = {beta} must lie in (0, 1)"));
    }
    if u.is_nan() {
        return domain("u is NaN");
    }
    if u <= T::zero() {
        return Ok(T::zero());
    }
    if u == T::infinity() {
        return Ok(T::zero());
    }
    if tail_regime(beta, u) {
        return Ok(tail_series(beta, u.powf(beta)) / u);
    }
    kanter(beta, u)
}

// Kanter's representation, with exp(−a(0)w) factored out of the integral.
fn kanter<T: Real>(beta: T, u: T) -> Result<T> {
    let one = T::one();
    let bm = one - beta;
    let w = u.powf(-beta / bm);
    let ln_a0 = beta / bm * beta.ln() + bm.ln();
    let a0 = ln_a0.exp();
    let pi = T::PI();
    let integrand = |phi: T| {
        if phi <= T::zero() || phi >= pi {
            return T::zero();
        }
        let d = (ln_sinc(beta * phi) - ln_sinc(phi)) / bm + ln_sinc(bm * phi) - ln_sinc(beta * phi);
        let excess = a0 * d.exp_m1() * w;
        if !excess.is_finite() || excess > T::c(745.0) {
            return T::zero();
        }
        a0 * d.exp() * (-excess).exp()
    };
    let mut pts = vec![T::zero()];
    let scale = one / (w + one).sqrt();
    let mut p = scale;
    while p < T::c(0.5) * pi {
        pts.push(p);
        p = p * T::c(2.0);
    }
    let mut gap = T::c(0.5) * pi;
    while gap > T::c(1e-6) {
        let q = pi - gap;
        if q > *pts.last().unwrap() {
            pts.push(q);
        }
        gap = gap * T::c(0.25);
    }
    pts.push(pi);
    let tol = Tolerance::new(T::zero(), T::c(1e-12).max(T::epsilon() * T::c(64.0)));
    let est = integrate_breaks(integrand, &pts, tol)?;
    let ln_pref = (beta / (bm * pi)).ln() - u.ln() / bm - a0 * w;
    Ok(ln_pref.exp() * est.value)
}

/// Density f_{E_t}(x) of the inverse subordinator E_t = inf{s : D_s > t}.
pub fn inverse_subordinator_density<T: Real>(beta: T, t: T, x: T) -> Result<T> {
    if !(beta > T::zero() && beta < T::one()) {
        return domain(format!("beta = {beta} must lie in (0, 1)"));
    }
    if !(t > T::zero() && t.is_finite()) {
        return domain(format!("t = {t} must be positive"));
    }
    if x.is_nan() {
        return domain("x is NaN");
    }
    if x <= T::zero() {
        return Ok(T::zero());
    }
    let tb = t.powf(beta);
    if tb / x >= T::c(8.0) {
        // Entire series in x: (1/(βπ)) Σ (−1)^{k+1} Γ(βk+1)/k! sin(πβk) t^{−βk} x^{k−1}.
        return Ok(tail_series(beta, tb / x) / (beta * x));
    }
    let u = t * x.powf(-T::one() / beta);
    let g = stable_subordinator_density(beta, u)?;
    Ok(t / beta * x.powf(-T::one() - T::one() / beta) * g)
}

/// Small-argument law of g_β with its normalizing constant 1/√(2πβ(1−β)).
pub fn subordinator_head_law<T: Real>(beta: T, u: T) -> T {
    let bm = T::one() - beta;
    let k = T::one() / (T::c(2.0) * T::PI() * beta * bm).sqrt();
    let r = beta / u;
    k * r.powf((T::c(2.0) - beta) / (T::c(2.0) * bm)) * (-bm * r.powf(beta / bm)).exp()
}

/// Large-argument law β u^{−β−1}/Γ(1−β).
pub fn subordinator_tail_law<T: Real>(beta: T, u: T) -> T {
    beta * u.powf(-beta - T::one()) * (-ln_gamma(T::one() - beta)).exp()
}
