use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fracfun::power_exp_integral;
use crate::kernels::{modal_factors, EigenSystem};
use crate::quadrature::gauss_legendre;

/// Upper bound on stored lag-table entries.
pub(crate) const MAX_TABLE: usize = 40_000_000;

/// ln of the mean over a time cell of a quantity interpolated exponentially between
/// e^{la} and e^{lb}; the arithmetic mean when an end value is zero.
pub(crate) fn ln_cell_mean(la: f64, lb: f64) -> f64 {
    let (lo, hi) = if la < lb { (la, lb) } else { (lb, la) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if lo == f64::NEG_INFINITY {
        return hi - std::f64::consts::LN_2;
    }
    let gap = hi - lo;
    if gap < 1e-9 {
        return 0.5 * (la + lb);
    }
    hi + (-(-gap).exp_m1() / gap).ln()
}

/// ln(e^a + e^b).
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Solves for the newest value y of a Volterra step whose newest cell carries the law
/// q τ^{−κ} and an exponential interpolant from the previous value to y:
/// y (1 − cn ρ Φ_ρ(ln(y/prev))) = rhs, with ρ = 1 − κ and cn = c ∫₀^{Δt} q τ^{−κ} dτ.
/// Inputs and the result are natural logs; −∞ stands for zero.
pub(crate) fn newest_cell_solve(cn: f64, ln_prev: f64, ln_rhs: f64, rho: f64) -> Result<f64> {
    if cn <= 0.0 {
        return Ok(ln_rhs);
    }
    if ln_prev == f64::NEG_INFINITY {
        if ln_rhs == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let den = 1.0 - cn;
        if den <= 0.0 {
            return Err(Error::Numerical(format!(
                "newest-cell weight {cn} ≥ 1 with zero previous value; refine the time step"
            )));
        }
        return Ok(ln_rhs - den.ln());
    }
    let g = |z: f64| 1.0 - cn * rho * power_exp_integral(rho, z);
    let forced = ln_rhs > f64::NEG_INFINITY;
    let target = ln_rhs - ln_prev;
    // Increasing in z on the admissible branch g > 0.
    let f = |z: f64| {
        let gz = g(z);
        if forced {
            if gz <= 0.0 {
                f64::NEG_INFINITY
            } else {
                z + gz.ln() - target
            }
        } else {
            gz
        }
    };
    let (mut lo, mut hi);
    let start = if forced && target.is_finite() { target } else { 0.0 };
    if f(start) < 0.0 {
        lo = start;
        let mut step = 1.0;
        loop {
            hi = lo + step;
            if f(hi) >= 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            if !step.is_finite() {
                return Err(Error::Numerical("newest-cell growth root not bracketed".into()));
            }
        }
    } else {
        hi = start;
        let mut step = 1.0;
        loop {
            lo = hi - step;
            if f(lo) < 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            if !step.is_finite() {
                return Err(Error::Numerical("newest-cell decay root not bracketed".into()));
            }
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ln_prev + 0.5 * (lo + hi))
}

/// Gauss–Legendre nodes and weights on [a, b].
pub(crate) fn gl_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    x.iter().zip(&w).map(|(&xi, &wi)| (a + half * (xi + 1.0), half * wi)).collect()
}

/// Modal factors at quadrature nodes of the lag cell [(l−1)Δt, lΔt], l ≥ 2.
pub(crate) fn lag_cell_nodes(es: &EigenSystem, beta: f64, dt: f64, l: usize, order: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    gl_on((l - 1) as f64 * dt, l as f64 * dt, order)
        .into_iter()
        .map(|(t, w)| Ok((w, modal_factors(es, beta, t)?)))
        .collect()
}

/// ∫₀^{Δt} E_n(τ) E_m(τ) dτ for all mode pairs. With τ = Δt v^{1/β} the integrand is smooth in v
/// apart from boundary layers at v ≈ 1/(μ Δt^β), resolved by geometric panels.
pub(crate) fn newest_cell_products(es: &EigenSystem, beta: f64, dt: f64) -> Result<DMatrix<f64>> {
    let n = es.len();
    let mut edges = vec![0.0];
    let mut v = 2f64.powi(-48);
    while v < 1.0 {
        edges.push(v);
        v *= 2.0;
    }
    edges.push(1.0);
    let mut out = DMatrix::zeros(n, n);
    for w in edges.windows(2) {
        for (v, wt) in gl_on(w[0], w[1], 8) {
            let tau = dt * v.powf(1.0 / beta);
            let jac = dt / beta * v.powf(1.0 / beta - 1.0);
            let e = nalgebra::DVector::from_vec(modal_factors(es, beta, tau.max(f64::MIN_POSITIVE))?);
            out.ger(wt * jac, &e, &e, 1.0);
        }
    }
    Ok(out)
}
