use crate::error::{domain, Result};
use crate::kernels::{apply_semigroup, colored_kernel_convolution, EigenSystem, ModelParams};

/// c₁ in ∬ G_B(t,x,w) G_B(t,x,w′) |w−w′|^{−γ} dw dw′ ≥ c₁ t^{−γβ/α}, fitted by
/// [`fit_colored_floor_constant`] for α = 2, β = ½, γ = ½ on a 48-cell grid of B(0, 1), t ≤ 0.1.
pub const COLORED_FLOOR_C1: f64 = 0.152;

/// ln S(t) for S(t) = Σ_{k≥1} (t/k^ρ)^k, summed in log space around the largest term.
pub fn ln_lower_series(t: f64, rho: f64) -> f64 {
    if !(t > 0.0) || !(rho > 0.0) {
        return f64::NEG_INFINITY;
    }
    let lt = t.ln();
    let ln_term = |k: f64| k * (lt - rho * k.ln());
    // The terms peak near k = t^{1/ρ}/e.
    let peak = (lt / rho - 1.0).exp().clamp(1.0, 1e15).round();
    let top = ln_term(peak);
    let mut sum = 0.0;
    let mut k = peak;
    while k >= 1.0 {
        let r = (ln_term(k) - top).exp();
        sum += r;
        if r < 1e-18 {
            break;
        }
        k -= 1.0;
    }
    let mut k = peak + 1.0;
    loop {
        let r = (ln_term(k) - top).exp();
        sum += r;
        // Past the peak consecutive ratios fall, so the tail is below r·q/(1−q).
        let q = (ln_term(k + 1.0) - ln_term(k)).exp();
        if q < 1.0 && r * q / (1.0 - q) < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    top + sum.ln()
}

/// S(t) = Σ_{k≥1} (t/k^ρ)^k; overflows to infinity for large t, see [`ln_lower_series`].
pub fn lower_series(t: f64, rho: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    ln_lower_series(t, rho).exp()
}

/// ln of g_t² + g_t² Σ_{k≥1} (λ²l²c₁)^k (t/k)^{k(α−γβ)/α}, with c₁ = [`COLORED_FLOOR_C1`].
pub fn ln_colored_lower_bound_series(params: &ModelParams, gamma: f64, l_sigma: f64, lambda: f64, t: f64, g_t: f64) -> Result<f64> {
    if !(g_t > 0.0) {
        return domain(format!("g_t > 0 violated (g_t = {g_t})"));
    }
    if !(t > 0.0) {
        return domain(format!("t > 0 violated (t = {t})"));
    }
    let rho = (params.alpha - gamma * params.beta) / params.alpha;
    if !(rho > 0.0) {
        return domain(format!("α − γβ > 0 violated (γ = {gamma})"));
    }
    let theta = (lambda * l_sigma).powi(2) * COLORED_FLOOR_C1 * t.powf(rho);
    let s = ln_lower_series(theta, rho);
    // ln(g²(1 + S)) with S possibly huge.
    let ln_one_plus = if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
    Ok(2.0 * g_t.ln() + ln_one_plus)
}

/// The colored-noise lower-bound series itself; may overflow to infinity.
pub fn colored_lower_bound_series(params: &ModelParams, gamma: f64, l_sigma: f64, lambda: f64, t: f64, g_t: f64) -> Result<f64> {
    Ok(ln_colored_lower_bound_series(params, gamma, l_sigma, lambda, t, g_t)?.exp())
}

/// min over interior nodes i and t ∈ [t0/100, t0] of t^{γβ/α} ∬ G_B G_B |w−w′|^{−γ}.
pub fn fit_colored_floor_constant(es: &EigenSystem, beta: f64, alpha: f64, gamma: f64, t0: f64) -> Result<f64> {
    let r = es.grid.radius;
    let interior: Vec<usize> = (0..es.len()).filter(|&i| es.grid.nodes[i].abs() <= 0.75 * r).collect();
    let mut c = f64::INFINITY;
    for k in 0..=8 {
        let t = t0 * 10f64.powf(-2.0 + 0.25 * k as f64);
        for &i in &interior {
            c = c.min(colored_kernel_convolution(es, beta, gamma, t, i, i)? * t.powf(gamma * beta / alpha));
        }
    }
    Ok(c)
}

/// g_t = min over s ∈ [0, t] and |x| ≤ R − ε of (𝒢_B u0)_{s+t₀}(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialFloor {
    pub g: f64,
    /// Set when u0 vanishes on the grid, in which case g = 0.
    pub zero_initial_data: bool,
}

pub fn initial_term_floor(es: &EigenSystem, beta: f64, u0: &[f64], epsilon: f64, t: f64, t0: f64) -> Result<InitialFloor> {
    let r = es.grid.radius;
    if !(epsilon > 0.0 && epsilon < r) {
        return domain(format!("ε ∈ (0, R) violated (ε = {epsilon}, R = {r})"));
    }
    if !(t >= 0.0 && t0 > 0.0) {
        return domain(format!("need t ≥ 0 and t₀ > 0 (t = {t}, t₀ = {t0})"));
    }
    if u0.len() != es.len() {
        return domain(format!("u0 has {} values, grid has {}", u0.len(), es.len()));
    }
    if u0.iter().any(|v| *v < 0.0) {
        return domain("u0 ≥ 0 violated");
    }
    if u0.iter().all(|v| *v == 0.0) {
        return Ok(InitialFloor { g: 0.0, zero_initial_data: true });
    }
    let inner: Vec<usize> = (0..es.len()).filter(|&i| es.grid.nodes[i].abs() <= r - epsilon).collect();
    if inner.is_empty() {
        return domain(format!("no grid nodes inside B(0, R − ε) for ε = {epsilon}"));
    }
    let mut g = f64::INFINITY;
    for k in 0..=32 {
        let s = t * k as f64 / 32.0;
        let d = apply_semigroup(es, beta, s + t0, u0)?;
        g = inner.iter().map(|&i| d[i]).fold(g, f64::min);
    }
    Ok(InitialFloor { g: g.max(0.0), zero_initial_data: false })
}
