use crate::error::{domain, Result};
use crate::quadrature::{integrate_breaks, Tolerance};
use crate::real::Real;

use super::gamma::{ln_gamma, rgamma};

/// Mittag-Leffler function E_β(x) = Σ_k x^k / Γ(1+βk) for β ∈ (0,1].
pub fn mittag_leffler<T: Real>(beta: T, x: T) -> Result<T> {
    if !(beta > T::zero() && beta <= T::one()) {
        return domain(format!("beta = {beta} must lie in (0, 1]"));
    }
    if !x.is_finite() {
        return domain(format!("x = {x} is not finite"));
    }
    if beta == T::one() {
        return Ok(x.exp());
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x > T::zero() {
        return Ok(positive_branch(beta, x));
    }
    let z = -x;
    if z <= T::one() {
        Ok(series(beta, x))
    } else if z < T::c(1e3) {
        integral_branch(beta, z)
    } else {
        Ok(asymptotic_negative(beta, z))
    }
}

fn series<T: Real>(beta: T, x: T) -> T {
    let ln_abs = x.abs().ln();
    let negative = x < T::zero();
    let mut sum = T::one();
    let mut k = 1usize;
    let mut small = 0;
    loop {
        let kf = T::c(k as f64);
        let mag = (kf * ln_abs - ln_gamma(T::one() + beta * kf)).exp();
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        sum += term;
        if mag <= T::epsilon() * sum.abs() * T::c(0.01) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    sum
}

fn positive_branch<T: Real>(beta: T, x: T) -> T {
    let y = x.powf(T::one() / beta);
    if y <= T::c(50.0) {
        return series(beta, x);
    }
    let mut tail = T::zero();
    let mut pw = T::one();
    for k in 1..=10 {
        pw = pw / x;
        tail += pw * rgamma(T::one() - beta * T::c(k as f64));
    }
    y.exp() / beta - tail
}

fn asymptotic_negative<T: Real>(beta: T, z: T) -> T {
    let mut sum = T::zero();
    let mut pw = T::one();
    for k in 1..=10 {
        pw = -pw / z;
        sum -= pw * rgamma(T::one() - beta * T::c(k as f64));
    }
    sum
}

// E_β(−z) = (sin βπ)/(βπ) ∫₀^∞ exp(−(vz)^{1/β}) / (v² + 2v cos βπ + 1) dv,
// split at v = 1 with v ↦ 1/v on the upper half.
fn integral_branch<T: Real>(beta: T, z: T) -> Result<T> {
    let pi = T::PI();
    let cb = (beta * pi).cos();
    let inv_b = T::one() / beta;
    let mut pts = vec![T::zero()];
    let mut v = T::one() / z;
    while v < T::one() {
        pts.push(v);
        v = v * T::c(2.0);
    }
    pts.push(T::one());
    let tol = Tolerance::new(T::zero(), T::c(1e-13).max(T::epsilon() * T::c(64.0)));
    let lower = integrate_breaks(
        |v: T| (-(v * z).powf(inv_b)).exp() / (v * v + T::c(2.0) * v * cb + T::one()),
        &pts,
        tol,
    )?;
    let upper = integrate_breaks(
        |u: T| {
            if u <= T::zero() {
                return T::zero();
            }
            (-(z / u).powf(inv_b)).exp() / (T::one() + T::c(2.0) * u * cb + u * u)
        },
        &[T::zero(), T::c(0.5), T::one()],
        tol,
    )?;
    Ok((beta * pi).sin() / (beta * pi) * (lower.value + upper.value))
}
