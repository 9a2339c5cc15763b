//! Experiment configuration.
//!
//! A run is described by one flat JSON object. Values are resolved with the
//! following precedence, lowest first:
//!
//! 1. built-in defaults (per subcommand),
//! 2. the document named by `--config`,
//! 3. command-line flags.
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qtorus::algebra::{CoeffJson, ElementJson, QtElement, Theta};
use qtorus::random::{random_element, rng, standard_test_element};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("config field `{path}`: {message}")]
    Field { path: String, message: String },
}

pub(crate) fn field_error(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        path: path.into(),
        message: message.into(),
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaPreset {
    Zero,
    Anticommuting,
    /// Every entry above the diagonal equal to `(√5 - 1)/2`.
    #[serde(alias = "irrational-golden")]
    #[value(alias = "irrational-golden")]
    Golden,
}

/// A named preset or explicit upper-triangle triples `(j, k, θ_jk)` with
/// `1 ≤ j < k ≤ d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Preset(ThetaPreset),
    Upper(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    /// `Σ_{|m|₁ ≤ 2} 2^{-|m|₁} U^m`.
    Standard,
    /// Seeded random coefficients on `{|m|_∞ ≤ degree}`.
    Random,
    /// The `coeffs` array.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Fejer,
    SquarePoisson,
    CircularPoisson,
    BochnerRiesz,
    Heat,
    /// `Φ^ε` means built from the Poisson profile.
    PhiEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// The merged configuration of one run. Subcommands read the keys they use
/// and ignore the rest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<CoeffJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_rep: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Reads `path` (if any) and overlays the non-null entries of `flags`.
    pub fn load(path: Option<&Path>, flags: Value) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                match serde_json::from_str::<Value>(&text).map_err(|e| ConfigError::Parse(e.to_string()))? {
                    Value::Object(m) => m,
                    _ => return Err(ConfigError::Parse("top level must be a JSON object".into())),
                }
            }
            None => Map::new(),
        };
        if let Value::Object(m) = flags {
            for (k, v) in m {
                if !v.is_null() {
                    doc.insert(k, v);
                }
            }
        }
        Self::from_map(doc)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<Value>(text).map_err(|e| ConfigError::Parse(e.to_string()))? {
            Value::Object(m) => Self::from_map(m),
            _ => Err(ConfigError::Parse("top level must be a JSON object".into())),
        }
    }

    fn from_map(doc: Map<String, Value>) -> Result<Self> {
        // key by key first, so a type error names the offending field
        for (k, v) in &doc {
            let mut one = Map::new();
            one.insert(k.clone(), v.clone());
            if let Err(e) = serde_json::from_value::<ExperimentConfig>(Value::Object(one)) {
                return Err(field_error(k.clone(), e.to_string()));
            }
        }
        serde_json::from_value(Value::Object(doc)).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn dim(&self, default: usize, lo: usize, hi: usize) -> Result<usize> {
        let d = self.d.unwrap_or(default);
        if d < lo || d > hi {
            return Err(field_error("d", format!("{d} is outside {lo}..={hi}")));
        }
        Ok(d)
    }

    pub fn theta(&self, d: usize, default: ThetaPreset) -> Result<Arc<Theta>> {
        let th = match self.theta.as_ref().unwrap_or(&ThetaSpec::Preset(default)) {
            ThetaSpec::Preset(ThetaPreset::Zero) => Theta::zero(d),
            ThetaSpec::Preset(ThetaPreset::Anticommuting) => Theta::anticommuting(d),
            ThetaSpec::Preset(ThetaPreset::Golden) => Theta::golden(d),
            ThetaSpec::Upper(entries) => {
                Theta::from_upper(d, entries).map_err(|e| field_error("theta", e.to_string()))?
            }
        };
        Ok(Arc::new(th))
    }

    /// `standard` unless a degree is given, in which case `random`.
    pub fn element_kind(&self) -> ElementKind {
        self.element.unwrap_or(if self.degree.is_some() {
            ElementKind::Random
        } else {
            ElementKind::Standard
        })
    }

    /// The test element. Random elements are drawn from the run seed itself,
    /// rows use split seeds.
    pub fn element(&self, theta: &Arc<Theta>) -> Result<QtElement> {
        match self.element_kind() {
            ElementKind::Standard => Ok(standard_test_element(theta)),
            ElementKind::Random => {
                let degree = self.degree.unwrap_or(2);
                if degree > 8 {
                    return Err(field_error("degree", format!("{degree} exceeds 8")));
                }
                let density = self.density.unwrap_or(0.6);
                if !(density > 0.0 && density <= 1.0) {
                    return Err(field_error("density", format!("{density} is outside (0, 1]")));
                }
                Ok(random_element(theta, degree, density, &mut rng(self.seed())))
            }
            ElementKind::Explicit => {
                let coeffs = self
                    .coeffs
                    .clone()
                    .ok_or_else(|| field_error("coeffs", "required when element is explicit"))?;
                ElementJson {
                    d: theta.dim(),
                    theta: theta.upper_entries(),
                    coeffs,
                }
                .into_element()
                .map_err(|e| field_error("coeffs", e.to_string()))
            }
        }
    }

    pub fn n_rep(&self, default: u32) -> Result<u32> {
        let n = self.n_rep.unwrap_or(default);
        if n > 12 {
            return Err(field_error("n_rep", format!("{n} exceeds 12")));
        }
        Ok(n)
    }

    pub fn exponent(&self, default: f64) -> Result<f64> {
        let p = self.p.unwrap_or(default);
        check_exponent("p", p)?;
        Ok(p)
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        match self.threads {
            Some(0) => Err(field_error("threads", "must be at least 1")),
            t => Ok(t),
        }
    }
}

pub(crate) fn check_exponent(path: &str, p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(field_error(path, format!("{p} is below 1")));
    }
    Ok(())
}

/// A nonempty grid of finite values, defaulted when absent.
pub(crate) fn grid(name: &str, value: &Option<Vec<f64>>, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    let g = value.clone().unwrap_or_else(default);
    if g.is_empty() {
        return Err(field_error(name, "grid is empty"));
    }
    for (i, v) in g.iter().enumerate() {
        if !v.is_finite() {
            return Err(field_error(format!("{name}[{i}]"), format!("{v} is not finite")));
        }
    }
    Ok(g)
}

/// Checks that `grid` is monotone in the given direction.
pub(crate) fn monotone(name: &str, grid: &[f64], increasing: bool) -> Result<()> {
    for (i, w) in grid.windows(2).enumerate() {
        let ok = if increasing { w[1] >= w[0] } else { w[1] <= w[0] };
        if !ok {
            let dir = if increasing { "nondecreasing" } else { "nonincreasing" };
            return Err(field_error(
                format!("{name}[{}]", i + 1),
                format!("{} follows {} but the grid must be {dir}", w[1], w[0]),
            ));
        }
    }
    Ok(())
}

pub(crate) fn each(name: &str, grid: &[f64], ok: impl Fn(f64) -> bool, domain: &str) -> Result<()> {
    for (i, &v) in grid.iter().enumerate() {
        if !ok(v) {
            return Err(field_error(format!("{name}[{i}]"), format!("{v} is outside {domain}")));
        }
    }
    Ok(())
}
