use std::f64::consts::PI;

use fracstorm::kernels::*;
use fracstorm::quadrature::{integrate_to_inf, Tolerance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// p(1, r) from the Fourier transform e^{−|ξ|^α} (d = 1 cosine transform, d = 3 radial sine transform).
fn fourier_density(alpha: f64, d: usize, r: f64) -> f64 {
    let breaks: Vec<f64> = (1..60).map(|k| k as f64 * PI / r.max(1e-3)).filter(|&k| k < 40.0).collect();
    let tol = Tolerance::new(1e-14, 1e-11);
    match d {
        1 => integrate_to_inf(|k| (k * r).cos() * (-k.powf(alpha)).exp(), 0.0, &breaks, tol).unwrap().value / PI,
        3 => {
            integrate_to_inf(|k| k * (k * r).sin() * (-k.powf(alpha)).exp(), 0.0, &breaks, tol).unwrap().value
                / (2.0 * PI * PI * r)
        }
        _ => unreachable!(),
    }
}

#[test]
fn stable_density_examples() {
    assert!((stable_density(2.0, 1.0, 1, 1.0, 0.0).unwrap() - 0.282_094_791_773_878_1).abs() < 1e-15);
    assert!((stable_density(1.0, 1.0, 1, 1.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
    let direct = stable_density(1.5, 1.0, 1, 2.0, 1.0).unwrap();
    let scaled = 2f64.powf(-1.0 / 1.5) * stable_density(1.5, 1.0, 1, 1.0, 2f64.powf(-1.0 / 1.5)).unwrap();
    assert!((direct - scaled).abs() < 1e-8 * direct);
    assert!(stable_density(1.5, 1.0, 1, 0.0, 1.0).is_err());
    assert!(stable_density(2.5, 1.0, 1, 1.0, 1.0).is_err());
}

#[test]
fn stable_density_matches_fourier_inversion() {
    for &(a, d) in &[(1.5, 1), (1.2, 1), (1.8, 1), (0.7, 1), (1.5, 3)] {
        for &r in &[0.1, 0.8, 1.5, 3.0, 7.0] {
            let got = standard_density(a, d, r).unwrap();
            let want = fourier_density(a, d, r);
            assert!((got - want).abs() < 1e-7 * want, "alpha {a} d {d} r {r}: {got} vs {want}");
        }
    }
}

#[test]
fn stable_scaling_identities() {
    // p(t, x) = t^{−d/α} p(1, t^{−1/α} x) and p(t, x) = p(t, |x|) along random lattices.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = [1.5, 2.0, 1.0, 1.3][rng.random_range(0..4)];
        let t: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        let x: f64 = rng.random_range(-5.0..5.0);
        let lhs = stable_density(a, 1.0, 1, t, x).unwrap();
        let rhs = t.powf(-1.0 / a) * stable_density(a, 1.0, 1, 1.0, t.powf(-1.0 / a) * x).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300), "alpha {a} t {t} x {x}");
        let s: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        // Semigroup scaling p(st, s^{1/α}x) = s^{−1/α} p(t, x).
        let l2 = stable_density(a, 1.0, 1, s * t, s.powf(1.0 / a) * x).unwrap();
        assert!((l2 - s.powf(-1.0 / a) * lhs).abs() <= 1e-8 * l2.max(1e-300));
    }
}

#[test]
fn stable_two_sided_bounds() {
    for &a in &[1.0, 1.5, 1.8] {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in -8..=8 {
            for j in -8..=8 {
                let t = 10f64.powf(i as f64 * 0.25);
                let x = 10f64.powf(j as f64 * 0.25);
                let p = stable_density(a, 1.0, 1, t, x).unwrap();
                let shape = t.powf(-1.0 / a).min(t / x.powf(1.0 + a));
                lo = lo.min(p / shape);
                hi = hi.max(p / shape);
            }
        }
        assert!(lo > 0.0 && hi / lo < 20.0, "alpha {a}: ratio range [{lo}, {hi}]");
    }
}

#[test]
fn free_kernel_classical_limit_and_monotonicity() {
    for &x in &[0.0, 0.3, 1.2] {
        let g = fractional_free_kernel(2.0, 1.0, 1.0, 1, 1.0, x).unwrap();
        assert_eq!(g, stable_density(2.0, 1.0, 1, 1.0, x).unwrap());
    }
    let mut prev = f64::INFINITY;
    for k in 0..101 {
        let x = k as f64 * 0.04;
        let g = fractional_free_kernel(2.0, 0.5, 1.0, 1, 1.0, x).unwrap();
        assert!(g >= 0.0 && g <= prev, "x {x}");
        prev = g;
    }
    assert_eq!(fractional_free_kernel(1.5, 0.5, 1.0, 2, 1.0, 0.0).unwrap(), f64::INFINITY);
}

#[test]
fn free_kernel_half_order_closed_form() {
    // α = 2, β = ½, d = 1: G_t(x) = ∫ (4πs)^{−1/2} e^{−x²/4s} (πt)^{−1/2} e^{−s²/4t} ds, checked by direct quadrature.
    for &x in &[0.0, 0.5, 2.0] {
        let t = 0.7;
        let want = integrate_to_inf(
            |s: f64| (4.0 * PI * s).powf(-0.5) * (-x * x / (4.0 * s)).exp() * (PI * t).powf(-0.5) * (-s * s / (4.0 * t)).exp(),
            0.0,
            &[0.01, 0.1, 1.0, 3.0],
            Tolerance::new(0.0, 1e-12),
        )
        .unwrap()
        .value;
        let got = fractional_free_kernel(2.0, 0.5, 1.0, 1, t, x).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "x {x}: {got} vs {want}");
    }
}

#[test]
fn green_constant_examples() {
    let c = green_l2_constant(2.0, 1.0, 1.0, 1).unwrap();
    assert!((c - (8.0 * PI).powf(-0.5)).abs() < 1e-12);
    let c = green_l2_constant(2.0, 0.5, 1.0, 1).unwrap();
    assert!((c - 0.217_451_929_993_410).abs() < 1e-10, "{c}");
    assert!(green_l2_constant(1.0, 0.5, 1.0, 2).is_err());
    for &(a, b, d) in &[(1.5, 0.3, 1), (2.0, 0.9, 3), (1.2, 0.6, 2)] {
        assert!(green_l2_constant(a, b, 1.0, d).unwrap() > 0.0);
    }
}

#[test]
fn green_constant_matches_x_space_integral() {
    // ∫ G_t(x)² dx = C* t^{−βd/α}, computed in x-space for a classical and a fractional case.
    for &(a, b, t) in &[(2.0, 0.5, 1.0), (2.0, 0.8, 0.3)] {
        let l2 = 2.0
            * integrate_to_inf(
                |x| fractional_free_kernel(a, b, 1.0, 1, t, x).unwrap().powi(2),
                0.0,
                &[0.1, 0.5, 1.0, 2.0, 5.0],
                Tolerance::new(0.0, 1e-8),
            )
            .unwrap()
            .value;
        let want = green_l2_constant(a, b, 1.0, 1).unwrap() * t.powf(-b / a);
        assert!((l2 / want - 1.0).abs() < 1e-3, "alpha {a} beta {b}: {l2} vs {want}");
    }
}

#[test]
fn generator_spectrum() {
    let grid = SpaceGrid::new(1.0, 256).unwrap();
    let a = build_discrete_generator(2.0, 1.0, &grid).unwrap();
    assert_eq!(a, a.transpose());
    let es = eigen_system(&a, &grid).unwrap();
    assert!((es.mu[0] / (PI * PI / 4.0) - 1.0).abs() < 5e-3);
    assert!((es.mu[1] / es.mu[0] - 4.0).abs() < 1e-3);
    let a15 = build_discrete_generator(1.5, 1.0, &grid).unwrap();
    assert_eq!(a15, a15.transpose());
    assert!(build_discrete_generator(1.5, 1.0, &SpaceGrid::new(1.0, 6).unwrap()).is_err());
}

#[test]
fn generator_self_convergence() {
    let mu1 = |n| EigenSystem::for_generator(1.5, 1.0, &SpaceGrid::new(1.0, n).unwrap()).unwrap().mu[0];
    let (m64, m128, m256) = (mu1(64), mu1(128), mu1(256));
    assert!((m256 - m128).abs() < (m128 - m64).abs(), "{m64} {m128} {m256}");
    let ratio = |n| {
        let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, n).unwrap()).unwrap();
        es.mu[1] / es.mu[0]
    };
    assert!((ratio(64) - 4.0).abs() > (ratio(128) - 4.0).abs());
}

#[test]
fn eigenfunctions_orthonormal_and_ground_state_positive() {
    for &a in &[2.0, 1.5, 0.8] {
        let grid = SpaceGrid::new(1.0, 64).unwrap();
        let es = EigenSystem::for_generator(a, 1.0, &grid).unwrap();
        let gram = es.phi.transpose() * &es.phi * grid.h;
        let resid = (gram - nalgebra::DMatrix::identity(64, 64)).amax();
        assert!(resid < 1e-10, "alpha {a}: {resid}");
        assert!(es.phi.column(0).iter().all(|&v| v > 0.0));
        assert!(es.mu.windows(2).all(|w| w[1] > w[0]) && es.mu[0] > 0.0);
    }
}

fn test_system() -> EigenSystem {
    EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 48).unwrap()).unwrap()
}

#[test]
fn dirichlet_kernel_symmetry_and_domination() {
    let es = test_system();
    let n = es.len();
    for &t in &[0.01, 0.1, 1.0] {
        for i in (0..n).step_by(5) {
            for j in (0..n).step_by(7) {
                let g = dirichlet_fractional_kernel(&es, 0.5, t, i, j, n).unwrap();
                assert_eq!(g, dirichlet_fractional_kernel(&es, 0.5, t, j, i, n).unwrap());
                let free = fractional_free_kernel(2.0, 0.5, 1.0, 1, t, es.grid.nodes[i] - es.grid.nodes[j]).unwrap();
                assert!(g <= free * 1.01 + 1e-12, "t {t} ({i},{j}): {g} vs {free}");
            }
        }
    }
}

#[test]
fn dirichlet_representations_agree() {
    let es = test_system();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..20 {
        let t = if k % 2 == 0 { 0.1 } else { 1.0 };
        let i = rng.random_range(0..es.len());
        let j = rng.random_range(0..es.len());
        let spectral = dirichlet_fractional_kernel(&es, 0.5, t, i, j, es.len()).unwrap();
        let sub = dirichlet_kernel_subordination(&es, 0.5, t, i, j).unwrap();
        assert!((spectral - sub).abs() <= 1e-5 * spectral.abs().max(1e-8), "t {t} ({i},{j}): {spectral} vs {sub}");
    }
    let p = dirichlet_kernel_subordination(&es, 1.0, 0.3, 10, 20).unwrap();
    assert!((p - killed_density(&es, 0.3, 10, 20)).abs() < 1e-15);
}

#[test]
fn dirichlet_mass_is_sub_markov() {
    let es = test_system();
    for &t in &[1e-3, 0.1, 1.0, 10.0] {
        let g = kernel_matrix(&es, 0.5, t).unwrap();
        for i in 0..es.len() {
            let mass: f64 = g.row(i).iter().sum::<f64>() * es.grid.h;
            assert!(mass <= 1.0 + 1e-6, "t {t} row {i}: {mass}");
        }
    }
}

#[test]
fn semigroup_examples() {
    let es = test_system();
    let n = es.len();
    let zero = apply_semigroup(&es, 0.5, 0.3, &vec![0.0; n]).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    let phi1: Vec<f64> = es.phi.column(0).iter().copied().collect();
    let out = apply_semigroup(&es, 0.5, 0.3, &phi1).unwrap();
    let e = fracstorm::fracfun::mittag_leffler(0.5, -es.mu[0] * 0.3f64.sqrt()).unwrap();
    for k in 0..n {
        assert!((out[k] - e * phi1[k]).abs() < 1e-12);
    }
    let u0: Vec<f64> = es.grid.nodes.iter().map(|x| 1.0 - x * x).collect();
    let near = apply_semigroup(&es, 0.5, 1e-14, &u0).unwrap();
    let err = near.iter().zip(&u0).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * es.grid.h;
    assert!(err.sqrt() < 1e-3);
    let ones = apply_semigroup(&es, 0.5, 0.2, &vec![1.0; n]).unwrap();
    assert!(ones.iter().all(|&v| v >= -1e-10));
}

#[test]
fn colored_convolution_properties() {
    let es = test_system();
    let n = es.len();
    let a = colored_kernel_convolution(&es, 0.5, 0.5, 0.1, 3, 17).unwrap();
    let b = colored_kernel_convolution(&es, 0.5, 0.5, 0.1, 17, 3).unwrap();
    assert_eq!(a, b);
    let g = kernel_matrix(&es, 0.5, 0.1).unwrap();
    let mass = |i: usize| g.row(i).iter().sum::<f64>() * es.grid.h;
    let sep = colored_kernel_convolution(&es, 0.5, 1e-4, 0.1, 10, 30).unwrap();
    assert!((sep / (mass(10) * mass(30)) - 1.0).abs() < 0.01);
    // Upper bound c₁ t^{−γβ/α}, c₁ fitted on t ∈ [0.01, 1]; it must not be exceeded at smaller t.
    let scaled = |t: f64| colored_kernel_convolution(&es, 0.5, 0.5, t, n / 2, n / 2).unwrap() * t.powf(0.125);
    let c1 = (0..9).map(|k| scaled(10f64.powf(-2.0 + 0.25 * k as f64))).fold(0.0, f64::max);
    for &t in &[1e-3, 3e-3] {
        assert!(scaled(t) <= 1.3 * c1, "t {t}: {} vs c1 {c1}", scaled(t));
    }
    assert!(colored_kernel_convolution(&es, 0.5, 1.2, 0.1, 1, 2).is_err());
}

#[test]
fn model_params_validation() {
    let mut p = ModelParams::default();
    assert!(p.validate().is_ok());
    p.beta = 0.9;
    p.alpha = 1.0;
    p.d = 2;
    let msg = p.validate().unwrap_err().to_string();
    assert!(msg.contains("d < (2∧1/β)·α"), "{msg}");
    p = ModelParams { noise: fracstorm::simulate::NoiseModel::Riesz { gamma: 1.5 }, ..ModelParams::default() };
    assert!(p.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_symmetric(t in 1e-3f64..5.0, i in 0usize..48, j in 0usize..48) {
        let es = test_system();
        let a = dirichlet_fractional_kernel(&es, 0.5, t, i, j, 48).unwrap();
        let b = dirichlet_fractional_kernel(&es, 0.5, t, j, i, 48).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a >= 0.0);
    }
}

#[test]
fn near_diagonal_floor() {
    let es = EigenSystem::for_generator(2.0, 1.0, &SpaceGrid::new(1.0, 64).unwrap()).unwrap();
    let floor = kernel_floor(&es, 2.0, 0.5, 1e-4, 4.0).unwrap();
    assert!(floor.c > 0.0 && floor.t0 >= 1e-4 && floor.t0 <= 4.0);
    assert!(floor.samples.iter().filter(|s| s.0 <= floor.t0).all(|s| s.1 >= floor.c));
    // Off the dyadic lattice the same C holds up to the lattice spacing.
    let nodes = &es.grid.nodes;
    for k in 1..6 {
        let t = floor.t0 * 0.3f64.powi(k);
        let g = kernel_matrix(&es, 0.5, t).unwrap();
        let reach = t.powf(0.25);
        for i in (0..64).filter(|&i| nodes[i].abs() <= 0.75) {
            for j in (0..64).filter(|&j| nodes[j].abs() <= 0.75 && (nodes[i] - nodes[j]).abs() < reach) {
                assert!(g[(i, j)] * reach >= 0.75 * floor.c, "t {t} ({i},{j})");
            }
        }
    }
    assert!(kernel_floor(&es, 2.0, 0.5, 1.0, 0.1).is_err());
}
