use crate::error::{domain, Result};
use crate::real::Real;

use super::gamma::gamma;

/// Samples of a function of time on `0 = t_0 < t_1 < … < t_n`, read as piecewise linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return domain(format!("{} times but {} values", times.len(), values.len()));
        }
        if times.len() < 2 {
            return domain("need at least two samples");
        }
        if times[0] != T::zero() {
            return domain("times must start at 0");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("times must be strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("values must be finite");
        }
        Ok(Self { times, values })
    }

    /// Samples `f` on `n` equally spaced points covering `[0, horizon]`.
    pub fn from_fn(horizon: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::on_grid(uniform_grid(horizon, n), f)
    }

    pub fn on_grid(times: Vec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn horizon(&self) -> T {
        *self.times.last().expect("non-empty")
    }

    /// Linear interpolation at `t`.
    pub fn eval(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        let j = self.cell_of(t);
        let (a, b) = (self.times[j], self.times[j + 1]);
        let s = (t - a) / (b - a);
        Ok(self.values[j] + s * (self.values[j + 1] - self.values[j]))
    }

    fn check_time(&self, t: T) -> Result<()> {
        if !(t >= T::zero() && t <= self.horizon()) {
            return domain(format!("t = {t} outside sampled range [0, {}]", self.horizon()));
        }
        Ok(())
    }

    fn cell_of(&self, t: T) -> usize {
        let idx = self.times.partition_point(|&s| s <= t);
        idx.saturating_sub(1).min(self.times.len() - 2)
    }

    fn slope(&self, j: usize) -> T {
        (self.values[j + 1] - self.values[j]) / (self.times[j + 1] - self.times[j])
    }

    /// Applies `op(self, ·)` at every sample time.
    pub fn map_nodes(&self, op: impl Fn(&Self, T) -> Result<T>) -> Result<Self> {
        let values = self.times.iter().map(|&t| op(self, t)).collect::<Result<Vec<_>>>()?;
        Self::new(self.times.clone(), values)
    }
}

pub fn uniform_grid<T: Real>(horizon: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let step = horizon / T::c((n - 1) as f64);
    (0..n).map(|i| if i == n - 1 { horizon } else { step * T::c(i as f64) }).collect()
}

/// Caputo derivative (1/Γ(1−β)) ∫₀^t g′(r)(t−r)^{−β} dr of the piecewise-linear interpolant.
pub fn caputo_derivative<T: Real>(g: &SampledFunction<T>, beta: T, t: T) -> Result<T> {
    if !(beta > T::zero() && beta <= T::one()) {
        return domain(format!("beta = {beta} must lie in (0, 1]"));
    }
    g.check_time(t)?;
    if beta == T::one() {
        let j = g.cell_of(t);
        return Ok(g.slope(j));
    }
    let e = T::one() - beta;
    let mut acc = T::zero();
    for j in 0..g.times.len() - 1 {
        let a = g.times[j];
        if a >= t {
            break;
        }
        let b = g.times[j + 1].min(t);
        acc += g.slope(j) * ((t - a).powf(e) - (t - b).powf(e));
    }
    Ok(acc / gamma(T::c(2.0) - beta))
}

/// Riemann–Liouville integral (1/Γ(γ)) ∫₀^t (t−τ)^{γ−1} g(τ) dτ of the piecewise-linear interpolant.
pub fn fractional_integral<T: Real>(g: &SampledFunction<T>, order: T, t: T) -> Result<T> {
    if !(order > T::zero() && order.is_finite()) {
        return domain(format!("order = {order} must be positive"));
    }
    g.check_time(t)?;
    let gm = order;
    let gp = order + T::one();
    let mut acc = T::zero();
    for j in 0..g.times.len() - 1 {
        let a = g.times[j];
        if a >= t {
            break;
        }
        let b = g.times[j + 1].min(t);
        let sl = g.slope(j);
        // g(τ) = g(a) + sl (τ − a); with A = t − b, B = t − a:
        // ∫ (t−τ)^{γ−1} dτ = (B^γ − A^γ)/γ,  ∫ (t−τ)^{γ−1}(t−τ) dτ = (B^{γ+1} − A^{γ+1})/(γ+1).
        let big = t - a;
        let small = t - b;
        let m0 = (big.powf(gm) - small.powf(gm)) / gm;
        let m1 = (big.powf(gp) - small.powf(gp)) / gp;
        let at_t = g.values[j] + sl * (t - a);
        acc += at_t * m0 - sl * m1;
    }
    Ok(acc / gamma(order))
}
