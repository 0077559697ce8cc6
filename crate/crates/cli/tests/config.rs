use fracstorm::simulate::{NoiseModel, Sigma};
use fracstorm_cli::config::{BackendKind, ConfigError, InitialData, RunConfig};
use fracstorm_cli::output::fmt17;
use proptest::prelude::*;

#[test]
fn defaults_round_trip() {
    let c = RunConfig::default();
    assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
}

#[test]
fn parses_sections_and_comments() {
    let text = "# colored run\nmodel.alpha = 2.0\nmodel.beta=0.5 # trailing\nnoise.kind=riesz\nnoise.gamma=0.5\n\ngrid.nx=32\nexcite.backend=montecarlo\nsim.sigma=table:-1:-0.5,0:0,1:2\nrun.u0=one\n";
    let c = RunConfig::parse(text).unwrap();
    assert_eq!(c.model.noise, NoiseModel::Riesz { gamma: 0.5 });
    assert_eq!(c.nx, 32);
    assert_eq!(c.backend, BackendKind::MonteCarlo);
    assert_eq!(c.u0, InitialData::One);
    assert_eq!(c.sigma, Sigma::Table { xs: vec![-1.0, 0.0, 1.0], ys: vec![-0.5, 0.0, 2.0] });
    assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(RunConfig::parse("model.alpha"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(RunConfig::parse("model.gamma=1"), Err(ConfigError::UnknownKey(_))));
    assert!(matches!(RunConfig::parse("grid.nx=lots"), Err(ConfigError::Value { .. })));
    assert!(matches!(RunConfig::parse("excite.backend=gpu"), Err(ConfigError::Value { .. })));
    let e = RunConfig::parse("model.alpha=0.5\nmodel.beta=0.5").unwrap_err();
    assert!(e.to_string().contains("d < (2∧1/β)·α violated"), "{e}");
    let e = RunConfig::parse("noise.kind=riesz\nnoise.gamma=1.5").unwrap_err();
    assert!(e.to_string().contains("0 < γ < min(α, d) violated"), "{e}");
    let e = RunConfig::parse("excite.lambda_min=10\nexcite.lambda_max=5").unwrap_err();
    assert!(matches!(e, ConfigError::Invalid(_)));
}

#[test]
fn overrides_apply_after_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "grid.nx=40\nsim.seed=3\n").unwrap();
    let c = RunConfig::resolve(Some(&path), &["sim.seed=9".to_string()]).unwrap();
    assert_eq!((c.nx, c.seed), (40, 9));
    assert!(matches!(RunConfig::resolve(Some(&dir.path().join("missing.cfg")), &[]), Err(ConfigError::Read { .. })));
}

#[test]
fn fmt17_examples() {
    assert_eq!(fmt17(1.0), "1");
    assert_eq!(fmt17(0.0), "0");
    assert_eq!(fmt17(-2.5), "-2.5");
    assert_eq!(fmt17(std::f64::consts::E), "2.7182818284590451");
    assert_eq!(fmt17(1e-7), "9.9999999999999995e-8");
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        (1.0f64..2.0, 0.05f64..1.0, 0.1f64..10.0, 0.1f64..5.0, 0.0f64..100.0),
        (any::<bool>(), 0.05f64..0.95),
        (8usize..200, 1usize..500, 0.01f64..10.0, any::<bool>()),
        (0.0f64..5.0, 2usize..5000, any::<u64>()),
        (1.0f64..1e3, 1.0f64..1e4, 4usize..40, any::<bool>(), any::<bool>(), 0.01f64..1.0),
    )
        .prop_map(|(m, n, g, s, e)| {
            let mut c = RunConfig::default();
            c.model.alpha = m.0;
            c.model.beta = m.1 * 0.999;
            c.model.nu = m.2;
            c.model.radius = m.3;
            c.model.lambda = m.4;
            if n.0 {
                c.model.noise = NoiseModel::Riesz { gamma: n.1 * c.model.alpha.min(1.0) };
            } else {
                c.model.beta = c.model.beta.min(0.99 * c.model.alpha);
            }
            c.nx = g.0;
            c.nt = g.1;
            c.horizon = g.2;
            c.u0 = if g.3 { InitialData::One } else { InitialData::Bump };
            c.l_sigma = s.0;
            c.replicates = s.1;
            c.seed = s.2;
            c.sigma = Sigma::Linear(s.0);
            c.lambda_min = e.0;
            c.lambda_max = e.0 + e.1;
            c.lambda_points = e.2;
            c.backend = if e.3 { BackendKind::MonteCarlo } else { BackendKind::Volterra };
            c.sup_functional = e.4;
            c.tolerance = e.5;
            c.kernel_times = vec![e.5, e.0];
            c
        })
}

proptest! {
    #[test]
    fn text_round_trip(c in config_strategy()) {
        prop_assume!(c.validate().is_ok());
        prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn fmt17_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }
}
