use crate::real::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(x: T) -> T {
    let mut a = T::c(LANCZOS[0]);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += T::c(c) / (x + T::c(k as f64));
    }
    a
}

/// ln|Γ(x)|.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::c(0.5);
    if x < half {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let s = (T::PI() * x).sin().abs();
        return T::PI().ln() - s.ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let t = x + T::c(LANCZOS_G) + half;
    half * (T::c(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + lanczos_sum(x).ln()
}

/// Γ(x); infinite at non-positive integers.
pub fn gamma<T: Real>(x: T) -> T {
    if x < T::c(0.5) {
        if x == x.floor() {
            return T::infinity();
        }
        return T::PI() / ((T::PI() * x).sin() * gamma(T::one() - x));
    }
    if x == x.floor() && x <= T::c(30.0) {
        let mut f = T::one();
        let mut k = T::c(2.0);
        while k < x {
            f *= k;
            k += T::one();
        }
        return f;
    }
    ln_gamma(x).exp()
}

/// 1/Γ(x), exactly zero at the poles.
pub fn rgamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::zero();
    }
    if x < T::c(0.5) {
        return (T::PI() * x).sin() * gamma(T::one() - x) / T::PI();
    }
    (-ln_gamma(x)).exp()
}

/// ∫₀¹ u^{a−1} e^{−xu} du for a > 0 and real x; equals x^{−a}γ(a, x) when x > 0.
pub fn power_exp_integral<T: Real>(a: T, x: T) -> T {
    let eps = T::epsilon();
    let one = T::one();
    if x == T::zero() {
        return one / a;
    }
    if x < T::zero() {
        if -x > T::c(700.0) {
            return T::infinity();
        }
        // Σ |x|^k / (k! (a + k)), all terms positive.
        let y = -x;
        let mut term = one;
        let mut sum = one / a;
        for k in 1..2000 {
            let kf = T::c(k as f64);
            term = term * y / kf;
            let add = term / (a + kf);
            sum += add;
            if add < eps * sum && kf > y {
                break;
            }
        }
        return sum;
    }
    if x < a + one {
        // e^{−x} Σ x^k / (a (a+1) ⋯ (a+k)).
        let mut term = one / a;
        let mut sum = term;
        for k in 1..2000 {
            term = term * x / (a + T::c(k as f64));
            sum += term;
            if term < eps * sum {
                break;
            }
        }
        return (-x).exp() * sum;
    }
    // Γ(a) x^{−a} minus the upper tail, whose continued fraction (Lentz) gives Γ(a, x) e^{x} x^{−a}.
    let tiny = T::min_positive_value() / eps;
    let mut b = x + one - a;
    let mut c = one / tiny;
    let mut d = one / b;
    let mut h = d;
    for i in 1..2000 {
        let an = -T::c(i as f64) * (T::c(i as f64) - a);
        b += T::c(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h *= del;
        if (del - one).abs() < eps {
            break;
        }
    }
    gamma(a) * x.powf(-a) - (-x).exp() * h
}
