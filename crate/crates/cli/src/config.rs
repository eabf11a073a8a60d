//! Run configuration: built-in defaults, then an optional `key = value`
//! file, then command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pegi_core::simulate::{default_source_panel, finite_kurtosis_panel, SourceSpec};
use pegi_core::{FieldKind, IterationConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Estimated columns, demixer `A_hat^H cov(X)^+` from the sample covariance.
    PegiSinr,
    /// Estimated columns, demixer `pinv(A_hat)`.
    PegiPinv,
    /// True `pinv(A)`.
    OracleAinv,
    /// True `A^H cov(X)^+` with the exact covariance.
    OracleSinrOpt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::PegiSinr,
        Algorithm::PegiPinv,
        Algorithm::OracleAinv,
        Algorithm::OracleSinrOpt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::PegiSinr => "pegi_sinr",
            Algorithm::PegiPinv => "pegi_pinv",
            Algorithm::OracleAinv => "oracle_ainv",
            Algorithm::OracleSinrOpt => "oracle_sinropt",
        }
    }

    pub fn uses_estimate(self) -> bool {
        matches!(self, Algorithm::PegiSinr | Algorithm::PegiPinv)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected pegi_sinr, pegi_pinv, oracle_ainv or oracle_sinropt)"))
    }
}

/// Source distributions for the `m` latent signals.
#[derive(Debug, Clone, PartialEq)]
pub enum Panel {
    /// The seven benchmark families cycled to `m`.
    Default,
    /// The same without `t(3)`.
    Finite,
    Explicit(Vec<SourceSpec>),
}

impl Panel {
    pub fn sources(&self, m: usize) -> CliResult<Vec<SourceSpec>> {
        match self {
            Panel::Default => Ok(default_source_panel(m)),
            Panel::Finite => Ok(finite_kurtosis_panel(m)),
            Panel::Explicit(specs) if specs.len() == m => Ok(specs.clone()),
            Panel::Explicit(specs) => Err(CliError::Usage(format!(
                "source panel lists {} distributions but m = {m}",
                specs.len()
            ))),
        }
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Panel::Default => f.write_str("default"),
            Panel::Finite => f.write_str("finite"),
            Panel::Explicit(specs) => {
                let names: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
                f.write_str(&names.join(","))
            }
        }
    }
}

impl FromStr for Panel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        // A trailing size ("default14") is accepted for readability; m decides.
        let sized = |name: &str| s.strip_prefix(name).is_some_and(|rest| rest.is_empty() || rest.parse::<usize>().is_ok());
        if sized("default") || sized("paper") {
            return Ok(Panel::Default);
        }
        if s == "finite" {
            return Ok(Panel::Finite);
        }
        split_list(s)
            .map(|item| item.parse::<SourceSpec>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(Panel::Explicit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub samples: Vec<usize>,
    pub noise_powers: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub panel: Panel,
    pub algorithms: Vec<Algorithm>,
    pub epsilon: f64,
    pub max_iters: usize,
    pub max_restarts: usize,
    pub min_kurtosis_z: f64,
    pub cond: f64,
    pub field: FieldKind,
    /// Record wall-clock runtimes; off by default so outputs stay reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let it = IterationConfig::empirical(0);
        Self {
            n: 8,
            m: 8,
            samples: vec![10_000, 100_000, 1_000_000],
            noise_powers: vec![0.0, 0.1, 0.67],
            trials: 20,
            seed: 0,
            panel: Panel::Default,
            algorithms: Algorithm::ALL.to_vec(),
            epsilon: it.epsilon,
            max_iters: it.max_iters,
            max_restarts: it.max_restarts,
            min_kurtosis_z: it.min_kurtosis_z,
            cond: 3.0,
            field: FieldKind::Real,
            timing: false,
            out: None,
        }
    }
}

/// Values that may come from a config file or from flags; unset fields keep
/// the value from the previous layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub samples: Option<Vec<usize>>,
    pub noise_powers: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub panel: Option<Panel>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_restarts: Option<usize>,
    pub min_kurtosis_z: Option<f64>,
    pub cond: Option<f64>,
    pub field: Option<FieldKind>,
    pub timing: Option<bool>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Parses a flat `key = value` file. Lists are comma separated.
    pub fn parse_file_text(text: &str, label: &str) -> CliResult<Self> {
        let mut o = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx as u64 + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let at = |column: usize, message: String| CliError::ParseAt {
                path: label.into(),
                line,
                column,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| at(1, format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let column = raw.find('=').map_or(1, |i| i + 2);
            o.set(key, value).map_err(|msg| at(column, msg))?;
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_file_text(&text, &path.display().to_string())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "n" => self.n = Some(parse_one(key, value)?),
            "m" => self.m = Some(parse_one(key, value)?),
            "samples" | "N" => self.samples = Some(parse_list(key, value, parse_count)?),
            "noise_power" | "p" => self.noise_powers = Some(parse_list(key, value, |s| parse_one("noise_power", s))?),
            "trials" => self.trials = Some(parse_one(key, value)?),
            "seed" => self.seed = Some(parse_one(key, value)?),
            "panel" => self.panel = Some(value.parse()?),
            "algorithms" | "algo" => self.algorithms = Some(parse_list(key, value, str::parse)?),
            "epsilon" => self.epsilon = Some(parse_one(key, value)?),
            "max_iters" => self.max_iters = Some(parse_one(key, value)?),
            "max_restarts" => self.max_restarts = Some(parse_one(key, value)?),
            "min_kurtosis_z" => self.min_kurtosis_z = Some(parse_one(key, value)?),
            "cond" => self.cond = Some(parse_one(key, value)?),
            "field" => self.field = Some(value.parse().map_err(|_| format!("unknown field {value:?}"))?),
            "timing" => self.timing = Some(parse_one(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// `self` on top of `base`.
    pub fn layer_over(self, base: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            samples: self.samples.or(base.samples),
            noise_powers: self.noise_powers.or(base.noise_powers),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            panel: self.panel.or(base.panel),
            algorithms: self.algorithms.or(base.algorithms),
            epsilon: self.epsilon.or(base.epsilon),
            max_iters: self.max_iters.or(base.max_iters),
            max_restarts: self.max_restarts.or(base.max_restarts),
            min_kurtosis_z: self.min_kurtosis_z.or(base.min_kurtosis_z),
            cond: self.cond.or(base.cond),
            field: self.field.or(base.field),
            timing: self.timing.or(base.timing),
            out: self.out.or(base.out),
        }
    }

    /// Applies the overrides to the defaults; `m` follows `n` unless set.
    pub fn resolve(self) -> CliResult<RunConfig> {
        let d = RunConfig::default();
        let n = self.n.unwrap_or(d.n);
        let cfg = RunConfig {
            n,
            m: self.m.unwrap_or(if self.n.is_some() { n } else { d.m }),
            samples: self.samples.unwrap_or(d.samples),
            noise_powers: self.noise_powers.unwrap_or(d.noise_powers),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            panel: self.panel.unwrap_or(d.panel),
            algorithms: self.algorithms.unwrap_or(d.algorithms),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            max_restarts: self.max_restarts.unwrap_or(d.max_restarts),
            min_kurtosis_z: self.min_kurtosis_z.unwrap_or(d.min_kurtosis_z),
            cond: self.cond.unwrap_or(d.cond),
            field: self.field.unwrap_or(d.field),
            timing: self.timing.unwrap_or(d.timing),
            out: self.out.or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.m == 0 || self.n == 0 {
            return usage(format!("n and m must be at least 1 (n = {}, m = {})", self.n, self.m));
        }
        if self.m > self.n {
            return usage(format!("m = {} exceeds n = {}", self.m, self.n));
        }
        if self.samples.is_empty() || self.noise_powers.is_empty() || self.algorithms.is_empty() {
            return usage("sample sizes, noise powers and algorithms must be non-empty lists".into());
        }
        if let Some(&bad) = self.samples.iter().find(|&&s| s < 4) {
            return usage(format!("sample size {bad} is below the minimum of 4"));
        }
        if let Some(&bad) = self.noise_powers.iter().find(|&&p| !(p >= 0.0 && p.is_finite())) {
            return usage(format!("noise power {bad} must be finite and non-negative"));
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if !(self.cond >= 1.0 && self.cond.is_finite()) {
            return usage(format!("condition number {} must be >= 1", self.cond));
        }
        self.panel.sources(self.m)?;
        self.iteration(0).validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn iteration(&self, rng_seed: u64) -> IterationConfig {
        IterationConfig {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            max_restarts: self.max_restarts,
            rng_seed,
            min_kurtosis_z: self.min_kurtosis_z,
        }
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("invalid value {value:?} for {key}"))
}

/// Accepts plain integers and exact scientific forms such as `1e6`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.trim().parse::<usize>() {
        return Ok(v);
    }
    let f: f64 = s.trim().parse().map_err(|_| format!("invalid count {s:?}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= usize::MAX as f64 {
        Ok(f as usize)
    } else {
        Err(format!("invalid count {s:?}"))
    }
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items = split_list(value).map(item).collect::<Result<Vec<T>, String>>()?;
    if items.is_empty() {
        return Err(format!("{key} must list at least one value"));
    }
    Ok(items)
}

/// Comma-separated list parser for clap flags.
pub fn parse_list_flag<T>(value: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    parse_list("flag", value, item)
}
