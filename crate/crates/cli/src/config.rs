//! TOML experiment configuration.
//!
//! ```toml
//! name = "fig1a"
//! allow_partial = false
//!
//! [design]
//! family = "laplace"
//! mu = 0.0
//! lambda = 1.0
//!
//! [regression]
//! function = "sin5x"
//!
//! [noise]
//! sigma = 0.1
//!
//! [grid]
//! start = -2.0
//! stop = 2.0
//! points = 81
//!
//! [bandwidths]
//! h = [0.1]
//!
//! [ensemble]
//! n = 10000
//! replicates = 50
//! seed = 1
//!
//! [lipschitz]
//! l_f = "auto"
//! ```
//!
//! Multivariate designs list one table per coordinate under
//! `design.factors`, with `regression.functions` naming one term per
//! coordinate. Grid fields and bandwidth entries then take arrays.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use nwbound::designs::{Design, DesignKind, ProductDesign};
use nwbound::estimator::Bandwidth;
use nwbound::geometry::{BoxInterval, Oscillation};
use nwbound::simulation::{
    linspace, test_function, test_function_keys, AdditiveRegression, BoundSettings, ExperimentConfig, NoiseModel,
    Setting, DEFAULT_REPLICATES, DEFAULT_SAMPLES,
};

/// A config problem, tagged with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(&self, dim: usize, field: &str) -> Result<Vec<T>> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.clone(); dim]),
            OneOrMany::Many(v) if v.len() == dim => Ok(v.clone()),
            OneOrMany::Many(v) => Err(ConfigError::new(
                field,
                format!("expected {dim} entries, got {}", v.len()),
            )),
        }
    }
}

/// A number or a keyword such as `"auto"` or `"inf"`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum NumberOrWord {
    Number(f64),
    Word(String),
}

/// A box given as `[[lo, hi], ...]`, or the word `"auto"`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Bounds(Vec<(f64, f64)>),
    Word(String),
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSection {
    pub function: Option<String>,
    pub functions: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub slope: f64,
}

fn default_sigma() -> f64 {
    0.1
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            slope: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: Option<OneOrMany<f64>>,
    pub stop: Option<OneOrMany<f64>>,
    pub points: Option<OneOrMany<usize>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthSection {
    pub h: Vec<OneOrMany<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_n() -> usize {
    DEFAULT_SAMPLES
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_seed() -> u64 {
    1
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n: default_n(),
            replicates: default_replicates(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSection {
    pub l_f: Option<NumberOrWord>,
    pub l_m: Option<NumberOrWord>,
    pub oscillation: Option<NumberOrWord>,
    pub upsilon: Option<BoxSpec>,
    pub delta: Option<BoxSpec>,
    pub gamma: Option<BoxSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub allow_partial: bool,
    pub design: Table,
    pub regression: RegressionSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub grid: GridSection,
    pub bandwidths: BandwidthSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub lipschitz: LipschitzSection,
}

/// A validated configuration: one experiment per bandwidth.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub allow_partial: bool,
    pub experiments: Vec<ExperimentConfig>,
    pub settings: BoundSettings,
}

impl Resolved {
    pub fn dim(&self) -> usize {
        self.experiments[0].design.dim()
    }
}

/// Parses the file, applies `--set` overrides, and returns the merged
/// document alongside the typed config.
pub fn load(path: &Path, overrides: &[String]) -> Result<(Table, RawConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::new("", format!("{}: {}", path.display(), e.message())))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let raw = RawConfig::deserialize(Value::Table(doc.clone())).map_err(|e| ConfigError::new("", e.message()))?;
    Ok((doc, raw))
}

/// Sets `a.b.c=value` in the document; the value is parsed as TOML and
/// falls back to a plain string.
pub fn apply_override(doc: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::new("--set", format!("expected KEY=VALUE, got `{spec}`")))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new("--set", format!("malformed key `{key}`")));
    }
    let mut table = doc;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        table = match entry {
            Value::Table(t) => t,
            _ => return Err(ConfigError::new(parts[..=i].join("."), "is not a table")),
        };
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn num(params: &BTreeMap<String, f64>, field: &str, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| ConfigError::new(format!("{field}.{key}"), "missing"))
}

fn parse_factor(table: &Table, field: &str) -> Result<Design> {
    let family = match table.get("family") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(ConfigError::new(format!("{field}.family"), "must be a string")),
        None => return Err(ConfigError::new(format!("{field}.family"), "missing")),
    };
    let allowed: &[&str] = match family {
        "laplace" => &["mu", "lambda"],
        "cauchy" => &["mu", "gamma"],
        "uniform" => &["a", "b"],
        "pareto" => &["alpha"],
        "normal" => &["mu", "sigma"],
        other => {
            return Err(ConfigError::new(
                format!("{field}.family"),
                format!(
                    "unknown design `{other}`; known designs: {}",
                    DesignKind::NAMES.join(", ")
                ),
            ))
        }
    };
    let mut params = BTreeMap::new();
    for (k, v) in table {
        if k == "family" {
            continue;
        }
        if !allowed.contains(&k.as_str()) {
            return Err(ConfigError::new(
                format!("{field}.{k}"),
                format!("not a {family} parameter (expected {})", allowed.join(", ")),
            ));
        }
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(ConfigError::new(format!("{field}.{k}"), "must be a number")),
        };
        params.insert(k.clone(), x);
    }
    let kind = match family {
        "laplace" => DesignKind::Laplace {
            mu: num(&params, field, "mu", Some(0.0))?,
            lambda: num(&params, field, "lambda", Some(1.0))?,
        },
        "cauchy" => DesignKind::Cauchy {
            mu: num(&params, field, "mu", Some(0.0))?,
            gamma: num(&params, field, "gamma", Some(1.0))?,
        },
        "uniform" => DesignKind::Uniform {
            a: num(&params, field, "a", None)?,
            b: num(&params, field, "b", None)?,
        },
        "pareto" => DesignKind::Pareto {
            alpha: num(&params, field, "alpha", None)?,
        },
        _ => DesignKind::Normal {
            mu: num(&params, field, "mu", Some(0.0))?,
            sigma: num(&params, field, "sigma", Some(1.0))?,
        },
    };
    Design::new(kind).map_err(|e| match e {
        nwbound::Error::InvalidParameter { name, reason } => ConfigError::new(format!("{field}.{name}"), reason),
        other => ConfigError::new(field, other),
    })
}

fn parse_design(table: &Table) -> Result<ProductDesign> {
    let factors = match table.get("factors") {
        Some(Value::Array(items)) => {
            if table.len() > 1 {
                return Err(ConfigError::new(
                    "design",
                    "use either `factors` or a single family, not both",
                ));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Value::Table(t) => parse_factor(t, &format!("design.factors[{i}]")),
                    _ => Err(ConfigError::new(format!("design.factors[{i}]"), "must be a table")),
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(_) => return Err(ConfigError::new("design.factors", "must be an array of tables")),
        None => vec![parse_factor(table, "design")?],
    };
    ProductDesign::new(factors).map_err(|e| ConfigError::new("design", e))
}

fn parse_regression(r: &RegressionSection) -> Result<AdditiveRegression> {
    let names: Vec<(String, &String)> = match (&r.function, &r.functions) {
        (Some(f), None) => vec![("regression.function".into(), f)],
        (None, Some(fs)) => fs
            .iter()
            .enumerate()
            .map(|(i, f)| (format!("regression.functions[{i}]"), f))
            .collect(),
        _ => {
            return Err(ConfigError::new(
                "regression",
                "give exactly one of `function` or `functions`",
            ))
        }
    };
    let terms = names
        .into_iter()
        .map(|(field, key)| {
            test_function(key).ok_or_else(|| {
                ConfigError::new(
                    field,
                    format!(
                        "unknown function `{key}`; known functions: {}",
                        test_function_keys().join(", ")
                    ),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AdditiveRegression::new(terms).map_err(|e| ConfigError::new("regression", e))
}

fn parse_grid(g: &GridSection, dim: usize) -> Result<Vec<Vec<f64>>> {
    if let Some(values) = &g.values {
        if dim != 1 || g.start.is_some() || g.stop.is_some() || g.points.is_some() {
            return Err(ConfigError::new(
                "grid.values",
                "only for one-dimensional designs, without start/stop/points",
            ));
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new("grid.values", "need at least one finite value"));
        }
        return Ok(values.iter().map(|&v| vec![v]).collect());
    }
    let get =
        |o: &Option<OneOrMany<f64>>, f: &str| o.as_ref().ok_or_else(|| ConfigError::new(f, "missing"))?.expand(dim, f);
    let start = get(&g.start, "grid.start")?;
    let stop = get(&g.stop, "grid.stop")?;
    let points = g
        .points
        .as_ref()
        .ok_or_else(|| ConfigError::new("grid.points", "missing"))?
        .expand(dim, "grid.points")?;
    let mut axes = Vec::with_capacity(dim);
    for k in 0..dim {
        if !(start[k].is_finite() && stop[k].is_finite() && start[k] <= stop[k]) {
            return Err(ConfigError::new(
                "grid.start",
                "start and stop must be finite with start <= stop",
            ));
        }
        if points[k] == 0 {
            return Err(ConfigError::new("grid.points", "must be at least 1"));
        }
        axes.push(linspace(start[k], stop[k], points[k]));
    }
    let mut grid = vec![vec![]];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(grid)
}

fn parse_bandwidths(b: &BandwidthSection, dim: usize) -> Result<Vec<Bandwidth<f64>>> {
    if b.h.is_empty() {
        return Err(ConfigError::new("bandwidths.h", "need at least one bandwidth"));
    }
    b.h.iter()
        .enumerate()
        .map(|(i, h)| {
            let field = format!("bandwidths.h[{i}]");
            let v = h.expand(dim, &field)?;
            if let Some(bad) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(ConfigError::new(
                    field,
                    format!("bandwidth must be finite and > 0, got {bad}"),
                ));
            }
            Bandwidth::new(v).map_err(|e| ConfigError::new(field, e))
        })
        .collect()
}

fn scalar_setting(v: &Option<NumberOrWord>, field: &str) -> Result<Setting<f64>> {
    match v {
        None => Ok(Setting::Auto),
        Some(NumberOrWord::Word(w)) if w == "auto" => Ok(Setting::Auto),
        Some(NumberOrWord::Number(x)) if *x >= 0.0 && x.is_finite() => Ok(Setting::Given(*x)),
        Some(_) => Err(ConfigError::new(
            field,
            "expected \"auto\" or a finite non-negative number",
        )),
    }
}

fn oscillation_setting(v: &Option<NumberOrWord>) -> Result<Setting<Oscillation<f64>>> {
    let field = "lipschitz.oscillation";
    match v {
        None => Ok(Setting::Auto),
        Some(NumberOrWord::Word(w)) if w == "auto" => Ok(Setting::Auto),
        Some(NumberOrWord::Word(w)) if w == "inf" => Ok(Setting::Given(Oscillation::Unbounded)),
        Some(NumberOrWord::Number(x)) if *x == f64::INFINITY => Ok(Setting::Given(Oscillation::Unbounded)),
        Some(NumberOrWord::Number(x)) if *x >= 0.0 && x.is_finite() => Ok(Setting::Given(Oscillation::Bounded(*x))),
        Some(_) => Err(ConfigError::new(
            field,
            "expected \"auto\", \"inf\" or a non-negative number",
        )),
    }
}

fn box_setting(v: &Option<BoxSpec>, field: &str, dim: usize) -> Result<Setting<BoxInterval<f64>>> {
    match v {
        None => Ok(Setting::Auto),
        Some(BoxSpec::Word(w)) if w == "auto" => Ok(Setting::Auto),
        Some(BoxSpec::Word(w)) => Err(ConfigError::new(
            field,
            format!("expected \"auto\" or [[lo, hi], ...], got `{w}`"),
        )),
        Some(BoxSpec::Bounds(b)) => {
            if b.len() != dim {
                return Err(ConfigError::new(
                    field,
                    format!("expected {dim} intervals, got {}", b.len()),
                ));
            }
            BoxInterval::from_bounds(b)
                .map(Setting::Given)
                .map_err(|e| ConfigError::new(field, e))
        }
    }
}

impl RawConfig {
    pub fn seed(&self) -> u64 {
        self.ensemble.seed
    }

    pub fn resolve(&self, fallback_name: &str) -> Result<Resolved> {
        let design = parse_design(&self.design)?;
        let dim = design.dim();
        let regression = parse_regression(&self.regression)?;
        if regression.dim() != dim {
            return Err(ConfigError::new(
                "regression",
                format!("{} terms for a {dim}-dimensional design", regression.dim()),
            ));
        }
        let (sigma, slope) = (self.noise.sigma, self.noise.slope);
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(ConfigError::new("noise.sigma", "must be finite and >= 0"));
        }
        if !(slope.is_finite() && slope >= 0.0) {
            return Err(ConfigError::new("noise.slope", "must be finite and >= 0"));
        }
        let noise = if slope == 0.0 {
            NoiseModel::Constant(sigma)
        } else {
            NoiseModel::Linear { base: sigma, slope }
        };
        let grid = parse_grid(&self.grid, dim)?;
        let bandwidths = parse_bandwidths(&self.bandwidths, dim)?;
        if self.ensemble.n < 100 {
            return Err(ConfigError::new("ensemble.n", "need at least 100 samples per dataset"));
        }
        if self.ensemble.replicates < 2 {
            return Err(ConfigError::new("ensemble.replicates", "need at least 2 replicates"));
        }
        let support = design.support();
        for p in &grid {
            if !support.contains(p).map_err(|e| ConfigError::new("grid", e))? {
                return Err(ConfigError::new(
                    "grid",
                    format!("point {p:?} lies outside the design support"),
                ));
            }
        }
        let l = &self.lipschitz;
        let settings = BoundSettings {
            l_f: scalar_setting(&l.l_f, "lipschitz.l_f")?,
            l_m: scalar_setting(&l.l_m, "lipschitz.l_m")?,
            oscillation: oscillation_setting(&l.oscillation)?,
            upsilon: box_setting(&l.upsilon, "lipschitz.upsilon", dim)?,
            delta: box_setting(&l.delta, "lipschitz.delta", dim)?,
            gamma: box_setting(&l.gamma, "lipschitz.gamma", dim)?,
        };
        let experiments = bandwidths
            .into_iter()
            .map(|bandwidth| ExperimentConfig {
                design: design.clone(),
                regression: regression.clone(),
                noise,
                n: self.ensemble.n,
                replicates: self.ensemble.replicates,
                bandwidth,
                grid: grid.clone(),
                seed: self.ensemble.seed,
            })
            .collect();
        Ok(Resolved {
            name: self.name.clone().unwrap_or_else(|| fallback_name.to_string()),
            allow_partial: self.allow_partial,
            experiments,
            settings,
        })
    }
}
