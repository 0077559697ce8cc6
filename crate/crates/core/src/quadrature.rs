//! Adaptive Gauss–Kronrod (G10/K21) integration and Gauss–Legendre rules.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::real::Real;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208883460690,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel, max_intervals: 4000 }
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        let rel = T::c(1e-10).max(eps * T::c(100.0));
        Self::new(T::zero(), rel)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub abs_err: T,
    pub intervals: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::c(0.5);
    let center = half * (a + b);
    let hl = half * (b - a);
    let fc = f(center);
    let mut resk = fc * T::c(WGK[10]);
    let mut resg = T::zero();
    let mut resabs = resk.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = hl * T::c(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::c(WGK[j]);
        resk += w * (f1 + f2);
        resabs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += T::c(WG[j / 2]) * (f1 + f2);
        }
    }
    let reskh = resk * half;
    let mut resasc = T::c(WGK[10]) * (fc - reskh).abs();
    for j in 0..10 {
        resasc += T::c(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * hl;
    let resabs = resabs * hl.abs();
    let resasc = resasc * hl.abs();
    let mut err = ((resk - resg) * hl).abs();
    if resasc != T::zero() && err != T::zero() {
        let r = (T::c(200.0) * err / resasc).powf(T::c(1.5));
        err = resasc * r.min(T::one());
    }
    let floor = T::c(50.0) * T::epsilon() * resabs;
    if resabs > T::min_positive_value() / (T::c(50.0) * T::epsilon()) {
        err = err.max(floor);
    }
    (value, err)
}

/// Integrates `f` over `[points[0], points[last]]`, splitting at every interior point first.
pub fn integrate_breaks<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    tol: Tolerance<T>,
) -> Result<Estimate<T>> {
    if points.len() < 2 {
        return Err(Error::Domain("integration needs at least two points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, err) = kronrod21(&mut f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Segment { a: w[0], b: w[1], value, err });
    }
    if heap.is_empty() {
        return Ok(Estimate { value: T::zero(), abs_err: T::zero(), intervals: 0 });
    }
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{}, {}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{}, {}] stopped at {} intervals: estimate {:e}, error {:e}, target {:e}",
                points[0],
                points[points.len() - 1],
                heap.len(),
                total.f64(),
                total_err.f64(),
                target.f64()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = T::c(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in this precision.
            total_err -= worst.err;
            heap.push(Segment { err: T::zero(), ..worst });
            continue;
        }
        let (v1, e1) = kronrod21(&mut f, worst.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let mut value = T::zero();
    let mut err = T::zero();
    let intervals = heap.len();
    for s in heap {
        value += s.value;
        err += s.err;
    }
    Ok(Estimate { value, abs_err: err, intervals })
}

pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<Estimate<T>> {
    integrate_breaks(f, &[a, b], tol)
}

/// Integrates over `[a, ∞)` through the map `x = a + u/(1−u)`.
/// `breaks` are optional interior points given in `x`.
pub fn integrate_to_inf<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    breaks: &[T],
    tol: Tolerance<T>,
) -> Result<Estimate<T>> {
    let mut pts = vec![T::zero()];
    for &x in breaks {
        if x > a && x.is_finite() {
            let s = x - a;
            pts.push(s / (T::one() + s));
        }
    }
    pts.push(T::one());
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap_or(Ordering::Equal));
    pts.dedup();
    integrate_breaks(
        |u: T| {
            let one_m = T::one() - u;
            if one_m <= T::zero() {
                return T::zero();
            }
            let x = a + u / one_m;
            let v = f(x);
            if v == T::zero() {
                T::zero()
            } else {
                v / (one_m * one_m)
            }
        },
        &pts,
        tol,
    )
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
