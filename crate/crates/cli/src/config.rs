//! Flat `section.key=value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracstorm::kernels::ModelParams;
use fracstorm::simulate::{NoiseModel, Sigma};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {msg}")]
    Read { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// u0 ≡ 1.
    One,
    /// u0(x) = 1 − x²/R².
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Volterra,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub nx: usize,
    pub nt: usize,
    pub horizon: f64,
    pub u0: InitialData,
    pub l_sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub sigma: Sigma,
    pub kernel_times: Vec<f64>,
    pub excite_t: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub backend: BackendKind,
    pub sup_functional: bool,
    pub tolerance: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            nx: 64,
            nt: 128,
            horizon: 1.0,
            u0: InitialData::Bump,
            l_sigma: 1.0,
            replicates: 2000,
            seed: 1,
            sigma: Sigma::Linear(1.0),
            kernel_times: vec![0.01, 0.1, 1.0],
            excite_t: 0.1,
            lambda_min: 1e2,
            lambda_max: 1e6,
            lambda_points: 17,
            backend: BackendKind::Volterra,
            sup_functional: false,
            tolerance: 0.1,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), msg: format!("`{v}`: {e}") })
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.into(), msg: msg.into() }
}

fn parse_sigma(key: &str, v: &str) -> Result<Sigma, ConfigError> {
    if let Some(l) = v.strip_prefix("linear:") {
        return Ok(Sigma::Linear(num(key, l)?));
    }
    if let Some(t) = v.strip_prefix("table:") {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for pair in t.split(',') {
            let (x, y) = pair.split_once(':').ok_or_else(|| bad(key, format!("table entry `{pair}` is not x:y")))?;
            xs.push(num(key, x)?);
            ys.push(num(key, y)?);
        }
        return Ok(Sigma::Table { xs, ys });
    }
    Err(bad(key, format!("`{v}` is neither linear:<l> nor table:<x:y,...>")))
}

fn sigma_text(s: &Sigma) -> String {
    match s {
        Sigma::Linear(l) => format!("linear:{l:?}"),
        Sigma::Table { xs, ys } => {
            let pairs: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{x:?}:{y:?}")).collect();
            format!("table:{}", pairs.join(","))
        }
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let v = v.trim();
        match key {
            "model.alpha" => self.model.alpha = num(key, v)?,
            "model.beta" => self.model.beta = num(key, v)?,
            "model.nu" => self.model.nu = num(key, v)?,
            "model.d" => self.model.d = num(key, v)?,
            "model.radius" => self.model.radius = num(key, v)?,
            "model.lambda" => self.model.lambda = num(key, v)?,
            "noise.kind" => {
                let gamma = match self.model.noise {
                    NoiseModel::Riesz { gamma } => gamma,
                    NoiseModel::White => 0.5,
                };
                self.model.noise = match v {
                    "white" => NoiseModel::White,
                    "riesz" => NoiseModel::Riesz { gamma },
                    _ => return Err(bad(key, format!("`{v}` is not white or riesz"))),
                }
            }
            "noise.gamma" => {
                let g = num(key, v)?;
                if let NoiseModel::Riesz { gamma } = &mut self.model.noise {
                    *gamma = g;
                } else {
                    self.model.noise = NoiseModel::Riesz { gamma: g };
                }
            }
            "grid.nx" => self.nx = num(key, v)?,
            "grid.nt" => self.nt = num(key, v)?,
            "run.T" => self.horizon = num(key, v)?,
            "run.u0" => {
                self.u0 = match v {
                    "one" => InitialData::One,
                    "bump" => InitialData::Bump,
                    _ => return Err(bad(key, format!("`{v}` is not one or bump"))),
                }
            }
            "moments.l_sigma" => self.l_sigma = num(key, v)?,
            "sim.replicates" => self.replicates = num(key, v)?,
            "sim.seed" => self.seed = num(key, v)?,
            "sim.sigma" => self.sigma = parse_sigma(key, v)?,
            "kernel.t" => self.kernel_times = v.split(',').map(|s| num(key, s.trim())).collect::<Result<_, _>>()?,
            "excite.t" => self.excite_t = num(key, v)?,
            "excite.lambda_min" => self.lambda_min = num(key, v)?,
            "excite.lambda_max" => self.lambda_max = num(key, v)?,
            "excite.points" => self.lambda_points = num(key, v)?,
            "excite.backend" => {
                self.backend = match v {
                    "volterra" => BackendKind::Volterra,
                    "montecarlo" => BackendKind::MonteCarlo,
                    _ => return Err(bad(key, format!("`{v}` is not volterra or montecarlo"))),
                }
            }
            "excite.functional" => {
                self.sup_functional = match v {
                    "energy" => false,
                    "sup" => true,
                    _ => return Err(bad(key, format!("`{v}` is not energy or sup"))),
                }
            }
            "excite.tolerance" => self.tolerance = num(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: k + 1, msg: format!("expected key=value, got `{line}`") })?;
            c.set(key.trim(), value)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: path.display().to_string(), msg: e.to_string() })?;
        Self::parse(&text)
    }

    /// Loads `path` (or the defaults) and applies `overrides` of the form key=value.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut c = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| bad(o, "override must be key=value"))?;
            c.set(k.trim(), v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.sigma.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let checks = [
            (self.nx >= 8, "grid.nx ≥ 8"),
            (self.nt >= 1, "grid.nt ≥ 1"),
            (self.horizon > 0.0 && self.horizon.is_finite(), "run.T > 0"),
            (self.replicates >= 2, "sim.replicates ≥ 2"),
            (self.kernel_times.iter().all(|t| *t > 0.0 && t.is_finite()) && !self.kernel_times.is_empty(), "kernel.t > 0"),
            (self.excite_t > 0.0 && self.excite_t.is_finite(), "excite.t > 0"),
            (self.lambda_min >= 1.0 && self.lambda_max > self.lambda_min, "1 ≤ excite.lambda_min < excite.lambda_max"),
            (self.lambda_points >= 4, "excite.points ≥ 4"),
            (self.tolerance > 0.0, "excite.tolerance > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(ConfigError::Invalid(format!("{what} violated")));
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("model.alpha", format!("{:?}", m.alpha));
        put("model.beta", format!("{:?}", m.beta));
        put("model.nu", format!("{:?}", m.nu));
        put("model.d", m.d.to_string());
        put("model.radius", format!("{:?}", m.radius));
        put("model.lambda", format!("{:?}", m.lambda));
        match m.noise {
            NoiseModel::White => put("noise.kind", "white".into()),
            NoiseModel::Riesz { gamma } => {
                put("noise.kind", "riesz".into());
                put("noise.gamma", format!("{gamma:?}"));
            }
        }
        put("grid.nx", self.nx.to_string());
        put("grid.nt", self.nt.to_string());
        put("run.T", format!("{:?}", self.horizon));
        put("run.u0", match self.u0 {
            InitialData::One => "one".into(),
            InitialData::Bump => "bump".into(),
        });
        put("moments.l_sigma", format!("{:?}", self.l_sigma));
        put("sim.replicates", self.replicates.to_string());
        put("sim.seed", self.seed.to_string());
        put("sim.sigma", sigma_text(&self.sigma));
        put("kernel.t", self.kernel_times.iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(","));
        put("excite.t", format!("{:?}", self.excite_t));
        put("excite.lambda_min", format!("{:?}", self.lambda_min));
        put("excite.lambda_max", format!("{:?}", self.lambda_max));
        put("excite.points", self.lambda_points.to_string());
        put("excite.backend", match self.backend {
            BackendKind::Volterra => "volterra".into(),
            BackendKind::MonteCarlo => "montecarlo".into(),
        });
        put("excite.functional", if self.sup_functional { "sup" } else { "energy" }.into());
        put("excite.tolerance", format!("{:?}", self.tolerance));
        put("output.dir", self.out_dir.display().to_string());
        s
    }

    /// The parameter set on one line, for CSV comment headers.
    pub fn summary_line(&self) -> String {
        self.to_text().lines().collect::<Vec<_>>().join(" ")
    }

    pub fn initial_data(&self, nodes: &[f64]) -> Vec<f64> {
        let r = self.model.radius;
        match self.u0 {
            InitialData::One => vec![1.0; nodes.len()],
            InitialData::Bump => nodes.iter().map(|x| (1.0 - (x / r).powi(2)).max(0.0)).collect(),
        }
    }
}
