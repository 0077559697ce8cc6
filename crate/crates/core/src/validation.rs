//! Desk-scale property suite: every check is recomputed from the public API and compared
//! against an independent reference value.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::excitation::{excitation_sweep, geometric_grid, Backend, SweepOptions};
use crate::fracfun::{
    caputo_derivative, fractional_integral, gamma, inverse_subordinator_density, ln_gamma, mittag_leffler,
    stable_subordinator_density, SampledFunction,
};
use crate::kernels::{
    dirichlet_fractional_kernel, dirichlet_kernel_subordination, fractional_free_kernel, green_l2_constant, kernel_floor,
    kernel_matrix, EigenSystem, ModelParams, SpaceGrid,
};
use crate::moments::{late_growth_rate, lower_series, ln_lower_series, renewal_growth_exponent, renewal_volterra_solve, second_moment_white, WhiteVolterra};
use crate::quadrature::{integrate_to_inf, Tolerance};
use crate::simulate::{simulate_mild, NoiseModel, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    Fracfun,
    Kernels,
    Moments,
    Simulate,
    Excitation,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Fracfun, Group::Kernels, Group::Moments, Group::Simulate, Group::Excitation];

    pub fn name(self) -> &'static str {
        match self {
            Group::Fracfun => "fracfun",
            Group::Kernels => "kernels",
            Group::Moments => "moments",
            Group::Simulate => "simulate",
            Group::Excitation => "excitation",
        }
    }

    pub fn parse(s: &str) -> Option<Group> {
        Group::ALL.into_iter().find(|g| g.name() == s)
    }
}

/// One measured check. `kind` says where the reference value comes from: a published value,
/// an independent computation, or an exact identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub group: Group,
    pub name: String,
    pub measured: f64,
    pub tolerance: String,
    pub kind: &'static str,
    pub passed: bool,
    pub note: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<4} {:<10} {:<44} measured={:<14.8e} tol={:<22} [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.group.name(),
            self.name,
            self.measured,
            self.tolerance,
            self.kind
        )?;
        if !self.note.is_empty() {
            write!(f, " {}", self.note)?;
        }
        Ok(())
    }
}

fn check(id: &str, group: Group, name: &str, measured: f64, tolerance: String, kind: &'static str, passed: bool) -> Check {
    Check { id: id.into(), group, name: name.into(), measured, tolerance, kind, passed, note: String::new() }
}

fn failed(id: &str, group: Group, name: &str, err: crate::Error) -> Check {
    Check { id: id.into(), group, name: name.into(), measured: f64::NAN, tolerance: "-".into(), kind: "-", passed: false, note: err.to_string() }
}

fn run(id: &str, group: Group, name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| failed(id, group, name, e))
}

/// Closed-form and tabulated special-function values.
pub fn special_function_checks() -> Vec<Check> {
    let g = Group::Fracfun;
    vec![
        run("C1a", g, "E_1(x) = e^x on [-5, 5] (rel)", || {
            let mut worst = 0.0f64;
            for k in 0..=200 {
                let x = -5.0 + 0.05 * k as f64;
                worst = worst.max((mittag_leffler(1.0f64, x)? / x.exp() - 1.0).abs());
            }
            Ok(check("C1a", g, "E_1(x) = e^x on [-5, 5] (rel)", worst, "< 1e-12".into(), "exact", worst < 1e-12))
        }),
        run("C1b", g, "E_1/2(-1) vs 0.4275836", || {
            let e = (mittag_leffler(0.5f64, -1.0)? - 0.427_583_6).abs();
            Ok(check("C1b", g, "E_1/2(-1) vs 0.4275836", e, "< 1e-6".into(), "published", e < 1e-6))
        }),
        run("C1c", g, "g_1/2(1) vs e^{-1/4}/(2 sqrt(pi))", || {
            let want = (-0.25f64).exp() / (2.0 * PI.sqrt());
            let e = (stable_subordinator_density(0.5f64, 1.0)? - want).abs();
            let ok = e < 1e-8 && (want - 0.219_695_6).abs() < 5e-8;
            Ok(check("C1c", g, "g_1/2(1) vs e^{-1/4}/(2 sqrt(pi))", e, "< 1e-8".into(), "independent", ok))
        }),
        run("C1d", g, "f_E1(1), beta=1/2 vs e^{-1/4}/sqrt(pi)", || {
            let want = (-0.25f64).exp() / PI.sqrt();
            let e = (inverse_subordinator_density(0.5f64, 1.0, 1.0)? - want).abs();
            let ok = e < 1e-8 && (want - 0.439_391_3).abs() < 5e-8;
            Ok(check("C1d", g, "f_E1(1), beta=1/2 vs e^{-1/4}/sqrt(pi)", e, "< 1e-8".into(), "independent", ok))
        }),
    ]
}

/// Max over g ∈ {1, t, t², sin t}, β ∈ {0.3, 0.5, 0.8} of |∂^β I^β g − g| on a 512-point grid of [0, 1],
/// together with the same maximum over t ≥ 0.1.
pub fn left_inverse_errors() -> Result<(f64, f64)> {
    let fs: [fn(f64) -> f64; 4] = [|_| 1.0, |t| t, |t| t * t, f64::sin];
    let (mut all, mut away) = (0.0f64, 0.0f64);
    for f in fs {
        let g = SampledFunction::from_fn(1.0, 512, f)?;
        for beta in [0.3, 0.5, 0.8] {
            let ig = g.map_nodes(|g, t| fractional_integral(g, beta, t))?;
            for &t in ig.times().iter().skip(1) {
                let e = (caputo_derivative(&ig, beta, t)? - f(t)).abs();
                all = all.max(e);
                if t >= 0.1 {
                    away = away.max(e);
                }
            }
        }
    }
    Ok((all, away))
}

pub fn calculus_check() -> Check {
    let g = Group::Fracfun;
    let name = "Caputo o I^beta = id, 512 points";
    run("C2", g, name, || {
        let (all, away) = left_inverse_errors()?;
        let mut c = check("C2", g, name, all, "< 1e-4".into(), "published", all < 1e-4);
        c.note = format!("(max over t >= 0.1: {away:.3e})");
        Ok(c)
    })
}

pub fn inverse_subordinator_mass_check() -> Check {
    let g = Group::Fracfun;
    let name = "integral of f_Et = 1";
    run("P-f1", g, name, || {
        let mut worst = 0.0f64;
        for b in [0.3, 0.5, 0.8] {
            for t in [0.1, 1.0, 10.0] {
                let s = f64::powf(t, b);
                let breaks: Vec<f64> = [1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0].iter().map(|k| k * s).collect();
                let m = integrate_to_inf(|x| inverse_subordinator_density(b, t, x).unwrap_or(f64::NAN), 0.0, &breaks, Tolerance::new(0.0, 1e-10))?;
                worst = worst.max((m.value - 1.0).abs());
            }
        }
        Ok(check("P-f1", g, name, worst, "< 1e-6".into(), "independent", worst < 1e-6))
    })
}

fn free_l2(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    let est = integrate_to_inf(
        |x| fractional_free_kernel(alpha, beta, 1.0, 1, t, x).map(|v| v * v).unwrap_or(f64::NAN),
        0.0,
        &[0.1, 0.5, 1.0, 2.0, 5.0],
        Tolerance::new(0.0, 1e-9),
    )?;
    Ok(2.0 * est.value)
}

pub fn green_constant_checks() -> Vec<Check> {
    let g = Group::Kernels;
    let mut out = Vec::new();
    let name = "int G_t^2 dx / (C* t^{-b/a}) - 1";
    out.push(run("C3a", g, name, || {
        let mut worst = 0.0f64;
        for (a, b) in [(2.0, 0.5), (2.0, 0.8), (1.5, 0.5)] {
            for t in [0.3, 1.0] {
                let want = green_l2_constant(a, b, 1.0, 1)? * f64::powf(t, -b / a);
                worst = worst.max((free_l2(a, b, t)? / want - 1.0).abs());
            }
        }
        Ok(check("C3a", g, name, worst, "< 1e-3".into(), "published", worst < 1e-3))
    }));
    let name = "C*(2,1,1,1) vs (8 pi)^{-1/2}";
    out.push(run("C3b", g, name, || {
        let e = (green_l2_constant(2.0, 1.0, 1.0, 1)? - (8.0 * PI).powf(-0.5)).abs();
        Ok(check("C3b", g, name, e, "< 1e-6".into(), "published", e < 1e-6))
    }));
    out
}

pub fn representation_check(seed: u64) -> Check {
    let g = Group::Kernels;
    let name = "spectral vs subordination G_B (rel)";
    run("C4", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 48)?)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let t = 10f64.powf(rng.random_range(-1.0..0.0));
            let i = rng.random_range(0..es.len());
            let j = rng.random_range(0..es.len());
            let s = dirichlet_fractional_kernel(&es, 0.5, t, i, j, es.len())?;
            let q = dirichlet_kernel_subordination(&es, 0.5, t, i, j)?;
            worst = worst.max((s - q).abs() / s.abs().max(1e-8));
        }
        Ok(check("C4", g, name, worst, "< 1e-5".into(), "independent", worst < 1e-5))
    })
}

pub fn kernel_comparison_checks() -> Vec<Check> {
    let g = Group::Kernels;
    let mut out = Vec::new();
    let es = match SpaceGrid::new(1.0, 64).and_then(|grid| EigenSystem::for_generator(2.0, 1.0, &grid)) {
        Ok(es) => es,
        Err(e) => return vec![failed("C5a", g, "eigen system", e)],
    };
    let name = "max G_B / G_free";
    out.push(run("C5a", g, name, || {
        let nodes = &es.grid.nodes;
        let mut worst = 0.0f64;
        for t in [1e-3, 0.01, 0.1, 1.0] {
            let gb = kernel_matrix(&es, 0.5, t)?;
            let by_offset =
                (0..es.len()).map(|k| fractional_free_kernel(2.0, 0.5, 1.0, 1, t, nodes[k] - nodes[0])).collect::<Result<Vec<_>>>()?;
            for i in 0..es.len() {
                for j in 0..es.len() {
                    let free = by_offset[i.abs_diff(j)];
                    if free > 1e-12 {
                        worst = worst.max(gb[(i, j)] / free);
                    }
                }
            }
        }
        Ok(check("C5a", g, name, worst, "<= 1.01".into(), "published", worst <= 1.01))
    }));
    let name = "near-diagonal floor C t^{-b/a}, t <= t0";
    out.push(run("C5b", g, name, || {
        let floor = kernel_floor(&es, 2.0, 0.5, 1e-4, 4.0)?;
        let mut c = check("C5b", g, name, floor.c, "C > 0".into(), "published", floor.c > 0.0);
        c.note = format!("(t0 = {})", floor.t0);
        Ok(c)
    }));
    out
}

/// c1 Σ_k (κΓ(ρ))^k t^{ρk} / Γ(ρk + 1).
fn resolvent_series(kappa: f64, rho: f64, t: f64) -> f64 {
    let z = (kappa * gamma(rho)).ln() + rho * t.ln();
    (0..400).map(|k| (k as f64 * z - ln_gamma(rho * k as f64 + 1.0)).exp()).sum()
}

pub fn renewal_checks() -> Vec<Check> {
    let g = Group::Moments;
    let mut out = Vec::new();
    let name = "renewal solve vs resolvent series, rho=1/2";
    out.push(run("C6a", g, name, || {
        let f = renewal_volterra_solve(1.0, 1.0, 0.5, 1.0, 4000)?;
        let worst = f
            .times()
            .iter()
            .zip(f.values())
            .skip(1)
            .map(|(t, v)| (v / resolvent_series(1.0, 0.5, *t) - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(check("C6a", g, name, worst, "< 1e-5".into(), "independent", worst < 1e-5))
    }));
    let name = "late growth-rate ratio kappa=4 : kappa=1";
    out.push(run("C6b", g, name, || {
        let rho = 0.5;
        let fitted = |kappa: f64| -> Result<f64> {
            let horizon = 25.0 / renewal_growth_exponent(kappa, rho);
            let f = renewal_volterra_solve(1.0, kappa, rho, horizon, 4000)?;
            late_growth_rate(&f, 0.5 * horizon)
        };
        let ratio = fitted(4.0)? / fitted(1.0)?;
        let want = 4f64.powf(1.0 / rho);
        Ok(check("C6b", g, name, ratio, format!("{want} +- 5%"), "published", (ratio / want - 1.0).abs() <= 0.05))
    }));
    out
}

pub fn series_checks() -> Vec<Check> {
    let g = Group::Moments;
    let mut out = Vec::new();
    let name = "S(1), rho=1 vs partial sum of k^-k";
    out.push(run("C10a", g, name, || {
        let direct: f64 = (1..40).map(|k| (k as f64).powi(-k)).sum();
        let s = lower_series(1.0, 1.0);
        let e = (s - direct).abs();
        let ok = e < 1e-10 && (s - 1.291_286_0).abs() < 5e-8;
        Ok(check("C10a", g, name, e, "< 1e-10".into(), "independent", ok))
    }));
    let name = "loglog S(1e6)/log 1e6, rho=0.75";
    out.push(run("C10b", g, name, || {
        let theta: f64 = 1e6;
        let r = ln_lower_series(theta, 0.75).ln() / theta.ln();
        let bound = 1.0 / 0.75 - 0.15;
        Ok(check("C10b", g, name, r, format!(">= {bound:.6}"), "published", r >= bound))
    }));
    out
}

pub fn moment_property_checks() -> Vec<Check> {
    let g = Group::Moments;
    let name = "lambda=0 moment equals deterministic square";
    vec![run("P-m1", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 32)?)?;
        let u0: Vec<f64> = es.grid.nodes.iter().map(|x| 1.0 - x * x).collect();
        let p = ModelParams { lambda: 0.0, ..ModelParams::default() };
        let m = second_moment_white(&p, &es, &u0, 1.0, 0.5, 16)?;
        let det = crate::kernels::apply_semigroup(&es, 0.5, 0.5, &u0)?;
        let worst = (0..32).map(|i| (m.moment(16, i) / (det[i] * det[i]) - 1.0).abs()).fold(0.0, f64::max);
        Ok(check("P-m1", g, name, worst, "< 1e-12".into(), "exact", worst < 1e-12))
    })]
}

fn bump(es: &EigenSystem) -> Vec<f64> {
    es.grid.nodes.iter().map(|x| (1.0 - x * x).max(0.0)).collect()
}

pub fn monte_carlo_check(seed: u64) -> Check {
    let g = Group::Simulate;
    let name = "MC vs Volterra, 10 probes, max |z|";
    run("C9", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 64)?)?;
        let u0 = bump(&es);
        let params = ModelParams { lambda: 1.0, ..ModelParams::default() };
        let config = SimConfig { seed, ..SimConfig::default() };
        let est = simulate_mild(&params, &es, &u0, &config)?;
        let m = second_moment_white(&params, &es, &u0, 1.0, config.horizon, config.nt)?;
        let j = config.nt;
        let worst = (0..10)
            .map(|k| {
                let i = 5 + 6 * k;
                (est.mean[j][i] - m.moment(j, i)).abs() / est.stderr[j][i]
            })
            .fold(0.0, f64::max);
        Ok(check("C9", g, name, worst, "< 3".into(), "independent", worst < 3.0))
    })
}

pub fn determinism_check(seed: u64) -> Check {
    let g = Group::Simulate;
    let name = "identical seed gives identical estimate";
    run("P-s1", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 16)?)?;
        let u0 = bump(&es);
        let params = ModelParams { lambda: 2.0, noise: NoiseModel::Riesz { gamma: 0.4 }, ..ModelParams::default() };
        let config = SimConfig { nx: 16, nt: 16, replicates: 100, seed, ..SimConfig::default() };
        let a = simulate_mild(&params, &es, &u0, &config)?;
        let b = simulate_mild(&params, &es, &u0, &config)?;
        let diff = a.mean.iter().flatten().zip(b.mean.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Ok(check("P-s1", g, name, diff, "== 0".into(), "exact", a == b))
    })
}

pub fn white_index_check() -> Check {
    let g = Group::Excitation;
    let name = "white index slope, nx=96, nt=192";
    run("C7", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 96)?)?;
        let lambdas = geometric_grid(1e2, 1e6, 17);
        let opts = SweepOptions { backend: Backend::Volterra { nt: 192 }, ..SweepOptions::default() };
        let fit = excitation_sweep(&ModelParams::default(), &es, &vec![1.0; 96], 0.1, &lambdas, &opts)?;
        let mut c = check("C7", g, name, fit.slope, "[2.40, 2.93]".into(), "published", (2.40..=2.93).contains(&fit.slope));
        c.note = format!("(theory {:.7})", fit.theory);
        Ok(c)
    })
}

pub fn colored_index_check() -> Check {
    let g = Group::Excitation;
    let name = "colored index slope, n=32, gamma=1/2";
    run("C8", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 32)?)?;
        let lambdas = geometric_grid(1e2, 1e5, 13);
        let params = ModelParams { noise: NoiseModel::Riesz { gamma: 0.5 }, ..ModelParams::default() };
        let opts = SweepOptions { backend: Backend::Volterra { nt: 64 }, ..SweepOptions::default() };
        let fit = excitation_sweep(&params, &es, &vec![1.0; 32], 0.1, &lambdas, &opts)?;
        let mut c = check("C8", g, name, fit.slope, "[2.01, 2.56]".into(), "published", (2.01..=2.56).contains(&fit.slope));
        c.note = format!("(theory {:.7})", fit.theory);
        Ok(c)
    })
}

pub fn excitation_property_checks() -> Vec<Check> {
    let g = Group::Excitation;
    let name = "log E_t strictly increasing in lambda";
    vec![run("P-e1", g, name, || {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 24)?)?;
        let solver = WhiteVolterra::new(&ModelParams::default(), &es, 0.1, 16)?;
        let mut prev = f64::NEG_INFINITY;
        let mut worst = f64::INFINITY;
        for lambda in geometric_grid(1.0, 1e4, 9) {
            let m = solver.solve(lambda, 1.0, &vec![1.0; 24])?;
            let e = m.ln_energy(m.last());
            worst = worst.min(e - prev);
            prev = e;
        }
        Ok(check("P-e1", g, name, worst, "> 0 (min increment)".into(), "exact", worst > 0.0))
    })]
}

/// Runs the checks of the selected groups (all when `only` is empty) in a fixed order.
pub fn run_suite(only: &[Group], seed: u64) -> Vec<Check> {
    let want = |g: Group| only.is_empty() || only.contains(&g);
    let mut out = Vec::new();
    if want(Group::Fracfun) {
        out.extend(special_function_checks());
        out.push(calculus_check());
        out.push(inverse_subordinator_mass_check());
    }
    if want(Group::Kernels) {
        out.extend(green_constant_checks());
        out.push(representation_check(seed));
        out.extend(kernel_comparison_checks());
    }
    if want(Group::Moments) {
        out.extend(renewal_checks());
        out.extend(series_checks());
        out.extend(moment_property_checks());
    }
    if want(Group::Simulate) {
        out.push(monte_carlo_check(seed));
        out.push(determinism_check(seed));
    }
    if want(Group::Excitation) {
        out.push(white_index_check());
        out.push(colored_index_check());
        out.extend(excitation_property_checks());
    }
    out
}
