use std::path::Path;
use std::process::{Command, Output};

fn fracstorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracstorm")).args(args).output().expect("spawn fracstorm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn specfun_ml_is_exp_at_beta_one() {
    let o = fracstorm(&["specfun", "ml", "--beta", "1", "--x", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fracstorm 0.1.0 command=specfun ml"));
    assert_eq!(lines.next().unwrap(), "beta,x,E");
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,1,2.718281828"), "{row}");
    assert_eq!(row.split(',').nth(2).unwrap().parse::<f64>().unwrap(), std::f64::consts::E);
}

#[test]
fn specfun_gsub_half() {
    let o = fracstorm(&["specfun", "gsub", "--beta", "0.5", "--u", "1"]);
    let rows = data_rows(&stdout(&o));
    let g: f64 = rows[0][2].parse().unwrap();
    assert!((g - 0.2196956).abs() < 1e-7, "{g}");
    let want = (-0.25f64).exp() / (2.0 * std::f64::consts::PI.sqrt());
    assert!((g - want).abs() < 1e-8);
}

#[test]
fn specfun_domain_error_exits_2() {
    let o = fracstorm(&["specfun", "ml", "--beta", "1.5", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
}

#[test]
fn specfun_caputo_of_t() {
    let o = fracstorm(&["specfun", "caputo", "--beta", "0.5", "--g", "t", "--t", "0.25,1"]);
    let rows = data_rows(&stdout(&o));
    for r in rows {
        let t: f64 = r[0].parse().unwrap();
        let v: f64 = r[1].parse().unwrap();
        let want = t.sqrt() / (0.5 * std::f64::consts::PI.sqrt());
        assert!((v - want).abs() < 1e-12, "t={t}: {v} vs {want}");
    }
}

#[test]
fn renewal_gronwall_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fracstorm(&["moments", "renewal", "--rho", "1", "--kappa", "2", "--c1", "1", "--T", "3", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f(3) = 403.4287934"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("renewal.csv")).unwrap();
    let last = data_rows(&csv).pop().unwrap();
    let f: f64 = last[1].parse().unwrap();
    assert!((f / 6f64.exp() - 1.0).abs() < 1e-9);
}

#[test]
fn missing_config_exits_2() {
    let o = fracstorm(&["--config", "/definitely/not/here.cfg", "kernel"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read config"));
}

#[test]
fn invalid_parameters_exit_2_with_condition() {
    let o = fracstorm(&["--set", "model.alpha=0.5", "--set", "model.beta=0.9", "kernel"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d < (2∧1/β)·α violated"));
}

fn only_expected(dir: &Path, names: &[&str]) {
    let mut found: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    found.sort();
    let mut want: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    want.sort();
    assert_eq!(found, want);
}

#[test]
fn excite_writes_json_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("white_b05.cfg");
    std::fs::write(&cfg, "model.alpha=2\nmodel.beta=0.5\nnoise.kind=white\ngrid.nx=32\ngrid.nt=64\nexcite.t=0.1\nsim.seed=5\n").unwrap();
    let out = dir.path().join("out");
    let o = fracstorm(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "excite"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS ±10%"));
    only_expected(&out, &["excite.csv", "excite.json", "excite.svg"]);

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("excite.json")).unwrap()).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 2.67).abs() < 0.27, "{slope}");
    assert!((v["theory"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["verdict"], "PASS ±10%");
    assert_eq!(v["backend"], "volterra");
    assert_eq!(v["lambdas"].as_array().unwrap().len(), 17);

    let csv = std::fs::read_to_string(out.join("excite.csv")).unwrap();
    let comment = csv.lines().next().unwrap();
    assert!(comment.starts_with("# fracstorm 0.1.0 command=excite seed=5 "));
    for key in ["model.alpha=2.0", "model.beta=0.5", "noise.kind=white", "grid.nx=32", "excite.t=0.1", "excite.points=17"] {
        assert!(comment.contains(key), "{key} missing from {comment}");
    }
    assert_eq!(csv.lines().nth(1).unwrap(), "lambda,log_E,log_E_stderr,functional,backend,in_window");
    assert_eq!(data_rows(&csv).len(), 17);

    let svg = std::fs::read_to_string(out.join("excite.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("theory"));
}

#[test]
fn kernel_and_moment_artifacts_carry_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["--out", out, "--set", "grid.nx=16", "--set", "grid.nt=16", "--set", "kernel.t=0.1"];
    for cmd in [&["kernel"][..], &["moments", "white"][..]] {
        let args: Vec<&str> = base.iter().copied().chain(cmd.iter().copied()).collect();
        let o = fracstorm(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let args: Vec<&str> = base.iter().copied().chain(["--set", "noise.kind=riesz", "moments", "colored"]).collect();
    assert_eq!(fracstorm(&args).status.code(), Some(0));
    only_expected(dir.path(), &["kernel.csv", "kernel_floor.csv", "moments_white.csv", "moments_colored.csv"]);
    for name in ["kernel.csv", "kernel_floor.csv", "moments_white.csv", "moments_colored.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        let c = lines.next().unwrap();
        assert!(c.starts_with("# fracstorm 0.1.0 ") && c.contains("seed=1") && c.contains("model.alpha="), "{name}: {c}");
        assert!(!lines.next().unwrap().starts_with('#'));
    }
    let white = std::fs::read_to_string(dir.path().join("moments_white.csv")).unwrap();
    assert_eq!(data_rows(&white).len(), 17 * 16);
}

#[test]
fn simulate_with_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ens = dir.path().join("paths.bin");
    let o = fracstorm(&[
        "--out", out, "--set", "grid.nx=8", "--set", "grid.nt=4", "--set", "sim.replicates=10", "--threads", "1", "simulate", "--ensemble",
        ens.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&ens).unwrap();
    let header_end = bytes.iter().position(|b| *b == b'\n').unwrap() + 1;
    assert_eq!(bytes.len() - header_end, 10 * 5 * 8 * 20);
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "t,x,mean_u2,stderr");
}

#[test]
fn threads_env_fallback_accepted() {
    let o = Command::new(env!("CARGO_BIN_EXE_fracstorm"))
        .env("FRACSTORM_THREADS", "1")
        .args(["specfun", "ml", "--beta", "0.5", "--x", "-1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_fracstorm")).env("FRACSTORM_THREADS", "many").args(["specfun", "ml", "--beta", "1", "--x", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validate_only_kernels() {
    let o = fracstorm(&["validate", "--only", "kernels"]);
    let text = stdout(&o);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.split_whitespace().nth(2) == Some("kernels")), "{text}");
    assert!(checks.iter().all(|l| l.starts_with("PASS")), "{text}");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_is_deterministic_and_exit_reflects_failures() {
    let a = fracstorm(&["validate", "--only", "fracfun", "moments", "--seed", "7"]);
    let b = fracstorm(&["validate", "--only", "fracfun", "moments", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let any_fail = text.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(a.status.code(), Some(if any_fail { 1 } else { 0 }));
    assert!(text.lines().last().unwrap().starts_with("summary: "));
    assert_eq!(fracstorm(&["validate", "--only", "nonsense"]).status.code(), Some(2));
}
