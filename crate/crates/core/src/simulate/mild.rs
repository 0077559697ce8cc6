use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::kernels::{apply_semigroup, modal_factors, EigenSystem, ModelParams, SpaceGrid};

use super::noise::{sample_noise_slice, DiscreteNoise};
use super::Sigma;

/// Values above this magnitude mark a replicate as blown up.
pub const BLOWUP_GUARD: f64 = 1e150;

const BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nx: usize,
    pub nt: usize,
    pub horizon: f64,
    pub replicates: usize,
    pub seed: u64,
    pub sigma: Sigma,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { nx: 64, nt: 128, horizon: 1.0, replicates: 2000, seed: 1, sigma: Sigma::Linear(1.0) }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 || self.nt < 1 {
            return domain(format!("grid sizes nx = {}, nt = {} too small", self.nx, self.nt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return domain(format!("horizon T = {} must be positive", self.horizon));
        }
        if self.replicates < 2 {
            return domain(format!("replicates = {} must be at least 2", self.replicates));
        }
        self.sigma.validate()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }
}

/// Monte Carlo estimate of E|u_t(x)|² on the time × space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub times: Vec<f64>,
    pub grid: SpaceGrid,
    /// `mean[j][i]` estimates E|u_{t_j}(x_i)|².
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub replicates_used: usize,
    pub blowups: usize,
}

struct Scheme<'a> {
    es: &'a EigenSystem,
    noise: DiscreteNoise,
    lambda: f64,
    sigma: &'a Sigma,
    dt: f64,
    nt: usize,
    seed: u64,
    /// Deterministic part (𝒢_B u0)_{t_j}.
    det: Vec<Vec<f64>>,
    /// Modal factors of G_B at the half lags (l + ½)Δt.
    half: Vec<Vec<f64>>,
    phit: DMatrix<f64>,
}

impl<'a> Scheme<'a> {
    fn new(params: &ModelParams, es: &'a EigenSystem, u0: &[f64], config: &'a SimConfig, markov: bool) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        if params.d != 1 {
            return domain(format!("Monte Carlo supports d = 1 only (d = {})", params.d));
        }
        if es.grid.n != config.nx {
            return domain(format!("eigen-system grid has {} cells, config.nx = {}", es.grid.n, config.nx));
        }
        if u0.len() != config.nx {
            return domain(format!("u0 has {} values, config.nx = {}", u0.len(), config.nx));
        }
        if markov && params.beta != 1.0 {
            return domain("Markov stepping requires the classical flag β = 1");
        }
        let dt = config.dt();
        let nt = config.nt;
        let mut det = vec![u0.to_vec()];
        for j in 1..=nt {
            det.push(apply_semigroup(es, params.beta, j as f64 * dt, u0)?);
        }
        let lags = if markov { 1 } else { nt };
        let half = (0..lags).map(|l| modal_factors(es, params.beta, (l as f64 + 0.5) * dt)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            es,
            noise: DiscreteNoise::new(params.noise, &es.grid)?,
            lambda: params.lambda,
            sigma: &config.sigma,
            dt,
            nt,
            seed: config.seed,
            det,
            half,
            phit: es.phi.transpose(),
        })
    }

    fn rng(&self, rep: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(rep as u64);
        rng
    }

    fn forcing(&self, u: &[f64], rng: &mut ChaCha20Rng) -> Result<DVector<f64>> {
        let dw = sample_noise_slice(&self.noise, self.dt, rng)?;
        let s = DVector::from_iterator(u.len(), u.iter().zip(&dw).map(|(&v, &w)| self.sigma.eval(v) * w));
        Ok(&self.phit * s)
    }

    fn blown_up(u: &[f64]) -> bool {
        u.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_GUARD)
    }

    /// Full-history mild scheme; `None` if the path crossed the blow-up guard.
    fn run(&self, rep: usize) -> Result<Option<Vec<Vec<f64>>>> {
        let n = self.es.len();
        let mut rng = self.rng(rep);
        let mut path = vec![self.det[0].clone()];
        let mut modal: Vec<DVector<f64>> = Vec::with_capacity(self.nt);
        for step in 0..self.nt {
            modal.push(self.forcing(&path[step], &mut rng)?);
            let mut b = DVector::zeros(n);
            for (m, a) in modal.iter().enumerate() {
                let f = &self.half[step - m];
                for k in 0..n {
                    b[k] += f[k] * a[k];
                }
            }
            let noise = &self.es.phi * b;
            let next: Vec<f64> = self.det[step + 1].iter().zip(noise.iter()).map(|(d, z)| d + self.lambda * z).collect();
            if Self::blown_up(&next) {
                return Ok(None);
            }
            path.push(next);
        }
        Ok(Some(path))
    }

    /// Markov recursion c ← e^{−μΔt}c + λ e^{−μΔt/2} Φᵀ(σ(u)ΔW), exact for β = 1.
    fn run_markov(&self, rep: usize) -> Result<Option<Vec<Vec<f64>>>> {
        let n = self.es.len();
        let mut rng = self.rng(rep);
        let decay: Vec<f64> = self.es.mu.iter().map(|m| (-m * self.dt).exp()).collect();
        let mut c = DVector::from_vec(self.es.project(&self.det[0]));
        let mut path = vec![self.det[0].clone()];
        for step in 0..self.nt {
            let a = self.forcing(&path[step], &mut rng)?;
            for k in 0..n {
                c[k] = decay[k] * c[k] + self.lambda * self.half[0][k] * a[k];
            }
            let next: Vec<f64> = (&self.es.phi * &c).iter().copied().collect();
            if Self::blown_up(&next) {
                return Ok(None);
            }
            path.push(next);
        }
        Ok(Some(path))
    }
}

#[derive(Clone)]
struct Partial {
    // Sums of v = u² − d² and v², with d the deterministic part.
    s1: Vec<f64>,
    s2: Vec<f64>,
    count: usize,
    blowups: usize,
}

impl Partial {
    fn zero(len: usize) -> Self {
        Self { s1: vec![0.0; len], s2: vec![0.0; len], count: 0, blowups: 0 }
    }

    fn merge(mut self, other: &Partial) -> Self {
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            *a += b;
        }
        self.count += other.count;
        self.blowups += other.blowups;
        self
    }
}

fn tree_reduce(mut parts: Vec<Partial>, len: usize) -> Partial {
    if parts.is_empty() {
        return Partial::zero(len);
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merge(&b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().expect("one element")
}

fn estimate(scheme: &Scheme<'_>, replicates: usize, markov: bool) -> Result<MomentEstimate> {
    let nx = scheme.es.len();
    let nt = scheme.nt;
    let len = (nt + 1) * nx;
    let det_sq: Vec<f64> = scheme.det.iter().flat_map(|row| row.iter().map(|d| d * d)).collect();
    let blocks: Vec<(usize, usize)> = (0..replicates).step_by(BLOCK).map(|s| (s, (s + BLOCK).min(replicates))).collect();
    let partials = blocks
        .par_iter()
        .map(|&(lo, hi)| -> Result<Partial> {
            let mut parts = Vec::with_capacity(hi - lo);
            for rep in lo..hi {
                let path = if markov { scheme.run_markov(rep)? } else { scheme.run(rep)? };
                let mut p = Partial::zero(len);
                match path {
                    None => p.blowups = 1,
                    Some(path) => {
                        p.count = 1;
                        for (idx, u) in path.iter().flatten().enumerate() {
                            let v = u * u - det_sq[idx];
                            p.s1[idx] = v;
                            p.s2[idx] = v * v;
                        }
                    }
                }
                parts.push(p);
            }
            Ok(tree_reduce(parts, len))
        })
        .collect::<Result<Vec<_>>>()?;
    let total = tree_reduce(partials, len);
    let used = total.count;
    let nf = used as f64;
    let mut mean = Vec::with_capacity(nt + 1);
    let mut stderr = Vec::with_capacity(nt + 1);
    for j in 0..=nt {
        let mut m = Vec::with_capacity(nx);
        let mut e = Vec::with_capacity(nx);
        for i in 0..nx {
            let idx = j * nx + i;
            if used == 0 {
                m.push(f64::NAN);
                e.push(f64::NAN);
                continue;
            }
            let mv = total.s1[idx] / nf;
            m.push((det_sq[idx] + mv).max(0.0));
            let var = if used > 1 { ((total.s2[idx] - nf * mv * mv) / (nf - 1.0)).max(0.0) } else { 0.0 };
            e.push((var / nf).sqrt());
        }
        mean.push(m);
        stderr.push(e);
    }
    Ok(MomentEstimate {
        times: (0..=nt).map(|j| j as f64 * scheme.dt).collect(),
        grid: scheme.es.grid.clone(),
        mean,
        stderr,
        replicates_used: used,
        blowups: total.blowups,
    })
}

/// Full-history mild-form Monte Carlo estimate of the second moment.
pub fn simulate_mild(params: &ModelParams, es: &EigenSystem, u0: &[f64], config: &SimConfig) -> Result<MomentEstimate> {
    let scheme = Scheme::new(params, es, u0, config, false)?;
    estimate(&scheme, config.replicates, false)
}

/// Classical (β = 1) reference estimate from Markovian stepping with the same noise streams.
pub fn simulate_markov_reference(params: &ModelParams, es: &EigenSystem, u0: &[f64], config: &SimConfig) -> Result<MomentEstimate> {
    let scheme = Scheme::new(params, es, u0, config, true)?;
    estimate(&scheme, config.replicates, true)
}

/// One replicate path `path[j][i] ≈ u_{t_j}(x_i)`; `None` if it blew up.
pub fn simulate_replicate(
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    config: &SimConfig,
    rep: usize,
) -> Result<Option<Vec<Vec<f64>>>> {
    let scheme = Scheme::new(params, es, u0, config, false)?;
    scheme.run(rep)
}
