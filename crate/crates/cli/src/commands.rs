//! Subcommand implementations.

use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fracstorm::excitation::{excitation_sweep, geometric_grid, Backend, Functional, SweepOptions};
use fracstorm::fracfun::{
    caputo_derivative, fractional_integral, inverse_subordinator_density, mittag_leffler, stable_subordinator_density,
    SampledFunction,
};
use fracstorm::kernels::{fractional_free_kernel, kernel_floor, kernel_matrix, EigenSystem, SpaceGrid};
use fracstorm::moments::{renewal_growth_exponent, renewal_volterra_solve, second_moment_colored, second_moment_white, MomentField};
use fracstorm::simulate::{simulate_mild, write_ensemble, NoiseModel, SimConfig};
use fracstorm::validation::{run_suite, Group};

use crate::config::{BackendKind, RunConfig};
use crate::output::{csv, fmt17, header_comment, readable, write_atomic};
use crate::svg::excitation_chart;

#[derive(Debug, Parser)]
#[command(name = "fracstorm", version, about = "Time-fractional stochastic heat equation: kernels, moments, Monte Carlo and excitation indices")]
pub struct Cli {
    /// key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory for artifacts (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel loops.
    #[arg(long, global = true, env = "FRACSTORM_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate special functions and fractional operators; CSV on stdout.
    Specfun {
        #[command(subcommand)]
        func: Specfun,
    },
    /// Dirichlet kernel G_B against the free kernel, plus the near-diagonal floor.
    Kernel,
    /// Second-moment equations.
    Moments {
        #[command(subcommand)]
        kind: Moments,
    },
    /// Monte Carlo estimate of E|u_t(x)|².
    Simulate {
        /// Also stream every replicate path to this binary file.
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// λ-sweep and excitation-index fit.
    Excite {
        /// Skip the SVG chart.
        #[arg(long)]
        no_svg: bool,
    },
    /// Run the property suite; exit 0 iff every check passes.
    Validate {
        /// Restrict to these groups: fracfun, kernels, moments, simulate, excitation.
        #[arg(long, num_args = 1..)]
        only: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TestFn {
    One,
    T,
    T2,
    Sin,
}

impl TestFn {
    fn eval(self, t: f64) -> f64 {
        match self {
            TestFn::One => 1.0,
            TestFn::T => t,
            TestFn::T2 => t * t,
            TestFn::Sin => t.sin(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            TestFn::One => "one",
            TestFn::T => "t",
            TestFn::T2 => "t2",
            TestFn::Sin => "sin",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Specfun {
    /// Mittag-Leffler E_β(x).
    Ml {
        #[arg(long)]
        beta: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Stable subordinator density g_β(u).
    Gsub {
        #[arg(long)]
        beta: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// Inverse subordinator density f_{E_t}(x).
    Finv {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Caputo derivative of a sampled test function.
    Caputo {
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value = "t")]
        g: TestFn,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Evaluation times; defaults to every grid node.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Riemann–Liouville integral of a sampled test function.
    Integral {
        #[arg(long)]
        order: f64,
        #[arg(long, value_enum, default_value = "t")]
        g: TestFn,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Moments {
    /// White-noise second moment M(t, x) with σ(u) = l·u.
    White,
    /// Riesz-noise second moment K(t; x, x) with σ(u) = l·u.
    Colored,
    /// Equality case f = c1 + κ ∫ (t−s)^{ρ−1} f(s) ds of the renewal inequality.
    Renewal {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 2000)]
        nt: usize,
    },
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = RunConfig::resolve(cli.config.as_deref(), &cli.set)?;
        let out = cli.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
        Ok(Self { cfg, out })
    }

    fn comment(&self, command: &str) -> String {
        header_comment(command, self.cfg.seed, &self.cfg.summary_line())
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = write_atomic(&self.out, name, text.as_bytes())?;
        eprintln!("wrote {}", p.display());
        Ok(p)
    }

    fn eigen(&self) -> Result<EigenSystem> {
        let m = &self.cfg.model;
        if m.d != 1 {
            return Err(fracstorm::Error::Domain(format!("grid commands support d = 1 only (model.d = {})", m.d)).into());
        }
        let grid = SpaceGrid::new(m.radius, self.cfg.nx)?;
        Ok(EigenSystem::for_generator(m.alpha, m.nu, &grid)?)
    }
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(fracstorm::Error::Domain("--threads must be at least 1".into()).into());
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Specfun { func } => specfun(func),
        Command::Moments { kind: Moments::Renewal { rho, kappa, c1, horizon, nt } } => {
            renewal(&Ctx::new(&cli)?, *rho, *kappa, *c1, *horizon, *nt)
        }
        Command::Kernel => kernel(&Ctx::new(&cli)?),
        Command::Moments { kind } => moments(&Ctx::new(&cli)?, kind),
        Command::Simulate { ensemble } => simulate(&Ctx::new(&cli)?, ensemble.as_deref()),
        Command::Excite { no_svg } => excite(&Ctx::new(&cli)?, *no_svg),
        Command::Validate { only, seed } => validate(only, *seed),
    }
}

fn row(vals: &[f64]) -> Vec<String> {
    vals.iter().map(|v| fmt17(*v)).collect()
}

fn specfun(func: &Specfun) -> Result<i32> {
    let (comment, header, rows): (String, Vec<&str>, Vec<Vec<String>>) = match func {
        Specfun::Ml { beta, x } => {
            let rows = x.iter().map(|&x| Ok(row(&[*beta, x, mittag_leffler(*beta, x)?]))).collect::<Result<_>>()?;
            (header_comment("specfun ml", 0, &format!("beta={beta:?}")), vec!["beta", "x", "E"], rows)
        }
        Specfun::Gsub { beta, u } => {
            let rows = u.iter().map(|&u| Ok(row(&[*beta, u, stable_subordinator_density(*beta, u)?]))).collect::<Result<_>>()?;
            (header_comment("specfun gsub", 0, &format!("beta={beta:?}")), vec!["beta", "u", "g"], rows)
        }
        Specfun::Finv { beta, t, x } => {
            let rows =
                x.iter().map(|&x| Ok(row(&[*beta, *t, x, inverse_subordinator_density(*beta, *t, x)?]))).collect::<Result<_>>()?;
            (header_comment("specfun finv", 0, &format!("beta={beta:?} t={t:?}")), vec!["beta", "t", "x", "f"], rows)
        }
        Specfun::Caputo { beta, g, horizon, n, t } => {
            let s = SampledFunction::from_fn(*horizon, *n, |x| g.eval(x))?;
            let ts = if t.is_empty() { s.times().to_vec() } else { t.clone() };
            let rows = ts.iter().map(|&t| Ok(row(&[t, caputo_derivative(&s, *beta, t)?]))).collect::<Result<_>>()?;
            let params = format!("beta={beta:?} g={} T={horizon:?} n={n}", g.name());
            (header_comment("specfun caputo", 0, &params), vec!["t", "caputo"], rows)
        }
        Specfun::Integral { order, g, horizon, n, t } => {
            let s = SampledFunction::from_fn(*horizon, *n, |x| g.eval(x))?;
            let ts = if t.is_empty() { s.times().to_vec() } else { t.clone() };
            let rows = ts.iter().map(|&t| Ok(row(&[t, fractional_integral(&s, *order, t)?]))).collect::<Result<_>>()?;
            let params = format!("order={order:?} g={} T={horizon:?} n={n}", g.name());
            (header_comment("specfun integral", 0, &params), vec!["t", "integral"], rows)
        }
    };
    print!("{}", csv(&comment, &header, rows));
    Ok(0)
}

fn renewal(ctx: &Ctx, rho: f64, kappa: f64, c1: f64, horizon: f64, nt: usize) -> Result<i32> {
    let f = renewal_volterra_solve(c1, kappa, rho, horizon, nt)?;
    let params = format!("rho={rho:?} kappa={kappa:?} c1={c1:?} T={horizon:?} nt={nt}");
    let rows = f.times().iter().zip(f.values()).map(|(t, v)| row(&[*t, *v]));
    ctx.write("renewal.csv", &csv(&header_comment("moments renewal", 0, &params), &["t", "f"], rows))?;
    let last = *f.values().last().unwrap_or(&f64::NAN);
    println!("renewal: f({}) = {} (growth exponent (κΓ(ρ))^(1/ρ) = {})", fmt17(horizon), fmt17(last), fmt17(renewal_growth_exponent(kappa, rho)));
    Ok(0)
}

fn kernel(ctx: &Ctx) -> Result<i32> {
    let es = ctx.eigen()?;
    let m = &ctx.cfg.model;
    let nodes = &es.grid.nodes;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &t in &ctx.cfg.kernel_times {
        let gb = kernel_matrix(&es, m.beta, t)?;
        let free = (0..es.len())
            .map(|k| fractional_free_kernel(m.alpha, m.beta, m.nu, m.d, t, nodes[k] - nodes[0]))
            .collect::<fracstorm::Result<Vec<_>>>()?;
        for i in 0..es.len() {
            for j in 0..es.len() {
                let f = free[i.abs_diff(j)];
                if f > 1e-12 {
                    worst = worst.max(gb[(i, j)] / f);
                }
                rows.push(row(&[t, nodes[i], nodes[j], gb[(i, j)], f]));
            }
        }
    }
    ctx.write("kernel.csv", &csv(&ctx.comment("kernel"), &["t", "x", "y", "G_B", "G_free"], rows))?;
    let floor = kernel_floor(&es, m.alpha, m.beta, 1e-4, 4.0)?;
    let frows = floor.samples.iter().map(|(t, v)| row(&[*t, *v]));
    ctx.write("kernel_floor.csv", &csv(&ctx.comment("kernel"), &["t", "scaled_min"], frows))?;
    println!(
        "kernel: max G_B/G_free = {} ({} ≤ 1.01), floor C = {} for t ≤ t0 = {}",
        fmt17(worst),
        if worst <= 1.01 { "PASS" } else { "FAIL" },
        fmt17(floor.c),
        fmt17(floor.t0)
    );
    Ok(0)
}

fn field_rows(f: &MomentField) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (j, t) in f.times.iter().enumerate() {
        for (i, x) in f.grid.nodes.iter().enumerate() {
            rows.push(row(&[*t, *x, f.ln_moment(j, i)]));
        }
    }
    rows
}

fn moments(ctx: &Ctx, kind: &Moments) -> Result<i32> {
    let es = ctx.eigen()?;
    let c = &ctx.cfg;
    let u0 = c.initial_data(&es.grid.nodes);
    let (name, field) = match kind {
        Moments::White => {
            if !matches!(c.model.noise, NoiseModel::White) {
                bail!(fracstorm::Error::Domain("moments white needs noise.kind=white".into()));
            }
            ("white", second_moment_white(&c.model, &es, &u0, c.l_sigma, c.horizon, c.nt)?)
        }
        Moments::Colored => {
            let NoiseModel::Riesz { gamma } = c.model.noise else {
                bail!(fracstorm::Error::Domain("moments colored needs noise.kind=riesz".into()));
            };
            ("colored", second_moment_colored(&c.model, &es, &u0, c.l_sigma, gamma, c.horizon, c.nt)?.diagonal())
        }
        Moments::Renewal { .. } => unreachable!("dispatched separately"),
    };
    let file = format!("moments_{name}.csv");
    ctx.write(&file, &csv(&ctx.comment(&format!("moments {name}")), &["t", "x", "log_M"], field_rows(&field)))?;
    let j = field.last();
    println!(
        "moments {name}: ln sup M(T) = {}, ln ∫M(T)dx = {} at T = {}",
        fmt17(field.ln_sup(j)),
        fmt17(field.ln_energy(j)),
        fmt17(field.times[j])
    );
    Ok(0)
}

fn sim_config(c: &RunConfig, horizon: f64) -> SimConfig {
    SimConfig { nx: c.nx, nt: c.nt, horizon, replicates: c.replicates, seed: c.seed, sigma: c.sigma.clone() }
}

fn simulate(ctx: &Ctx, ensemble: Option<&Path>) -> Result<i32> {
    let es = ctx.eigen()?;
    let c = &ctx.cfg;
    let u0 = c.initial_data(&es.grid.nodes);
    let sc = sim_config(c, c.horizon);
    let est = simulate_mild(&c.model, &es, &u0, &sc)?;
    let mut rows = Vec::new();
    for (j, t) in est.times.iter().enumerate() {
        for (i, x) in est.grid.nodes.iter().enumerate() {
            rows.push(row(&[*t, *x, est.mean[j][i], est.stderr[j][i]]));
        }
    }
    ctx.write("simulate.csv", &csv(&ctx.comment("simulate"), &["t", "x", "mean_u2", "stderr"], rows))?;
    if let Some(path) = ensemble {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let tmp = tempfile::NamedTempFile::new_in(&dir)?;
        let mut w = BufWriter::new(tmp.as_file());
        write_ensemble(&mut w, &c.model, &es, &u0, &sc)?;
        w.flush()?;
        drop(w);
        tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
        readable(path)?;
        eprintln!("wrote {}", path.display());
    }
    let mid = es.grid.nearest(0.0);
    let j = est.times.len() - 1;
    println!(
        "simulate: {} of {} replicates used ({} blow-ups), E|u_T(0)|² = {} ± {}",
        est.replicates_used,
        c.replicates,
        est.blowups,
        fmt17(est.mean[j][mid]),
        fmt17(est.stderr[j][mid])
    );
    Ok(0)
}

fn percent(tol: f64) -> String {
    fmt17(((tol * 100.0) * 1e6).round() / 1e6)
}

fn excite(ctx: &Ctx, no_svg: bool) -> Result<i32> {
    let es = ctx.eigen()?;
    let c = &ctx.cfg;
    let u0 = c.initial_data(&es.grid.nodes);
    let lambdas = geometric_grid(c.lambda_min, c.lambda_max, c.lambda_points);
    let (backend, backend_name) = match c.backend {
        BackendKind::Volterra => (Backend::Volterra { nt: c.nt }, "volterra"),
        BackendKind::MonteCarlo => (Backend::MonteCarlo(sim_config(c, c.excite_t)), "montecarlo"),
    };
    let functional = if c.sup_functional { Functional::Sup } else { Functional::Energy };
    let fname = if c.sup_functional { "sup" } else { "energy" };
    let opts = SweepOptions { backend, functional, l_sigma: c.l_sigma };
    let fit = excitation_sweep(&c.model, &es, &u0, c.excite_t, &lambdas, &opts)?;
    let verdict = format!("{} ±{}%", if fit.within(c.tolerance) { "PASS" } else { "FAIL" }, percent(c.tolerance));

    let rows = (0..lambdas.len()).map(|k| {
        vec![
            fmt17(lambdas[k]),
            fmt17(fit.log_values[k]),
            fmt17(fit.log_stderr[k]),
            fname.to_string(),
            backend_name.to_string(),
            u8::from(fit.window.contains(&k)).to_string(),
        ]
    });
    let header = ["lambda", "log_E", "log_E_stderr", "functional", "backend", "in_window"];
    ctx.write("excite.csv", &csv(&ctx.comment("excite"), &header, rows))?;

    let m = &c.model;
    let noise = match m.noise {
        NoiseModel::White => json!({ "kind": "white" }),
        NoiseModel::Riesz { gamma } => json!({ "kind": "riesz", "gamma": gamma }),
    };
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "excite",
        "seed": c.seed,
        "params": { "alpha": m.alpha, "beta": m.beta, "nu": m.nu, "d": m.d, "radius": m.radius, "noise": noise },
        "grid": { "nx": c.nx, "nt": c.nt },
        "t": c.excite_t,
        "backend": backend_name,
        "functional": fname,
        "lambdas": fit.lambdas,
        "log_values": fit.log_values,
        "log_stderr": fit.log_stderr,
        "window": fit.window,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residuals": fit.residuals,
        "theory": fit.theory,
        "relative_error": fit.relative_error(),
        "tolerance": c.tolerance,
        "verdict": verdict,
    });
    ctx.write("excite.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    if !no_svg {
        let pts: Vec<(f64, f64)> = lambdas
            .iter()
            .zip(&fit.log_values)
            .filter(|(_, v)| **v > 0.0)
            .map(|(l, v)| (l.ln(), v.ln()))
            .collect();
        ctx.write("excite.svg", &excitation_chart(&pts, fit.slope, fit.intercept, fit.theory))?;
    }
    println!("excite: slope {} vs theory {} ({})", fmt17(fit.slope), fmt17(fit.theory), verdict);
    Ok(0)
}

fn validate(only: &[String], seed: u64) -> Result<i32> {
    let groups = only
        .iter()
        .map(|s| Group::parse(s).ok_or_else(|| fracstorm::Error::Domain(format!("unknown group `{s}`"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let checks = run_suite(&groups, seed);
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("summary: {passed}/{} passed (seed {seed})", checks.len());
    Ok(if passed == checks.len() { 0 } else { 1 })
}
