use std::fmt;
use std::path::{Path, PathBuf};

use phs_core::cart::{CrossMoveSet, SurvivalSchema};
use phs_core::linreg::GeneratorConfig;
use phs_core::mixture::GaussianMixture;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A fully expanded experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of the preset this config was expanded from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub seed: u64,
    pub n_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Run per-chain updates on the rayon pool. Results are identical either way.
    #[serde(default)]
    pub parallel: bool,
    #[serde(default = "yes")]
    pub progress: bool,
    /// Write every k-th iteration to the trace file.
    #[serde(default = "one")]
    pub trace_thin: usize,
    pub target: TargetSpec,
    pub sampler: SamplerSpec,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Mixture(MixtureTarget),
    Linreg(LinregTarget),
    Cart(CartTarget),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTarget {
    #[serde(default = "GaussianMixture::reference")]
    pub mixture: GaussianMixture,
    pub delta: f64,
    #[serde(default)]
    pub init: f64,
    #[serde(default)]
    pub histogram: HistogramSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinregTarget {
    pub data: LinregData,
    #[serde(default)]
    pub init: ModelInit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartTarget {
    pub data: PathBuf,
    pub schema: SchemaSource,
    #[serde(default = "default_max_leaves")]
    pub max_leaves: usize,
    #[serde(default)]
    pub cross_moves: CrossMoveSet,
    #[serde(default)]
    pub init: TreeInit,
}

fn default_max_leaves() -> usize {
    phs_core::cart::DEFAULT_MAX_LEAVES
}

impl TargetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TargetSpec::Mixture(_) => "mixture",
            TargetSpec::Linreg(_) => "linreg",
            TargetSpec::Cart(_) => "cart",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            lo: -12.0,
            hi: 8.0,
            bins: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LinregData {
    /// CSV with the response in the first column.
    Csv(PathBuf),
    /// Synthetic data; `data_seed` defaults to the run seed.
    Generate(GenerateSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub collinear: bool,
    #[serde(default = "default_noise")]
    pub noise_variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
}

fn default_n() -> usize {
    GeneratorConfig::default().n
}

fn default_p() -> usize {
    GeneratorConfig::default().p
}

fn default_noise() -> f64 {
    GeneratorConfig::default().noise_variance
}

impl GenerateSpec {
    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            n: self.n,
            p: self.p,
            collinear: self.collinear,
            noise_variance: self.noise_variance,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelInit {
    #[default]
    Null,
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeInit {
    #[default]
    Root,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaSource {
    File(PathBuf),
    Inline(SurvivalSchema),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    Mh,
    Pt(PtSampler),
    Phs(PhsSampler),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtSampler {
    pub chains: usize,
    /// Explicit ladder; otherwise equally spaced from 1 to `t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub swap: SwapSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhsSampler {
    pub chains: usize,
}

impl SamplerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SamplerSpec::Mh => "mh",
            SamplerSpec::Pt(_) => "pt",
            SamplerSpec::Phs(_) => "phs",
        }
    }

    pub fn chains(&self) -> usize {
        match self {
            SamplerSpec::Mh => 1,
            SamplerSpec::Pt(PtSampler { chains, .. }) | SamplerSpec::Phs(PhsSampler { chains }) => *chains,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapSpec {
    /// Alternate update and swap steps.
    Deterministic,
    /// Swap step with this probability each iteration.
    Independent(f64),
}

/// Covariate layout of the liver-metastases survival data.
pub fn liver_schema() -> Value {
    serde_json::json!({
        "time": "time",
        "event": "event",
        "covariates": [
            {"name": "DLM", "kind": "continuous"},
            {"name": "AGE", "kind": "ordinal"},
            {"name": "NLM", "kind": "ordinal"},
            {"name": "TD", "kind": "categorical"},
            {"name": "SEX", "kind": "categorical"},
            {"name": "LI", "kind": "categorical"},
            {"name": "LRD", "kind": "categorical"},
            {"name": "TNM", "kind": "categorical"},
            {"name": "LOC", "kind": "categorical"}
        ]
    })
}

pub const PRESET_NAMES: [&str; 9] = [
    "mixture-phs",
    "mixture-mh",
    "linreg-mh",
    "linreg-pt",
    "linreg-pt-s05",
    "linreg-pt-s08",
    "linreg-phs",
    "cart-phs",
    "cart-mh",
];

/// The dataset seed the linreg presets use.
pub const LINREG_DATA_SEED: u64 = 30;

pub fn preset(name: &str) -> Option<Value> {
    use serde_json::json;
    let mixture = json!({"kind": "mixture", "delta": 1.0, "init": 0.0});
    let linreg = json!({
        "kind": "linreg",
        "data": {"generate": {"n": 180, "p": 15, "collinear": false, "noise_variance": 6.25, "data_seed": LINREG_DATA_SEED}},
        "init": "null"
    });
    let pt = |s: f64| json!({"kind": "pt", "chains": 9, "t_max": 5.0, "swap": {"independent": s}});
    let cart = json!({"kind": "cart", "schema": liver_schema(), "max_leaves": 30, "cross_moves": "all", "init": "root"});
    let v = match name {
        "mixture-phs" => json!({"n_iter": 100_000, "target": mixture, "sampler": {"kind": "phs", "chains": 10}}),
        "mixture-mh" => json!({"n_iter": 1_000_000, "target": mixture, "sampler": {"kind": "mh"}}),
        "linreg-mh" => json!({"n_iter": 50_000, "target": linreg, "sampler": {"kind": "mh"}}),
        "linreg-pt" => json!({"n_iter": 50_000, "target": linreg, "sampler": pt(0.2)}),
        "linreg-pt-s05" => json!({"n_iter": 50_000, "target": linreg, "sampler": pt(0.5)}),
        "linreg-pt-s08" => json!({"n_iter": 50_000, "target": linreg, "sampler": pt(0.8)}),
        "linreg-phs" => json!({"n_iter": 50_000, "target": linreg, "sampler": {"kind": "phs", "chains": 9}}),
        "cart-phs" => json!({"n_iter": 50_000, "target": cart, "sampler": {"kind": "phs", "chains": 20}}),
        "cart-mh" => json!({"n_iter": 50_000, "target": cart, "sampler": {"kind": "mh"}}),
        _ => return None,
    };
    Some(v)
}

/// Recursively overlays `top` on `base`; objects merge, everything else replaces.
pub fn deep_merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// A validation problem tied to a config field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "field `{}` (line {l}): {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

/// Line of the key for a dotted field path in the user's JSON text, found by
/// searching for each path segment in turn.
pub fn locate(source: &str, field: &str) -> Option<usize> {
    let mut offset = 0;
    let mut found = None;
    for seg in field.split('.').filter(|s| !s.is_empty() && s.parse::<usize>().is_err()) {
        let key = format!("\"{seg}\"");
        let mut from = offset;
        loop {
            let pos = from + source[from..].find(&key)?;
            let rest = source[pos + key.len()..].trim_start();
            if rest.starts_with(':') {
                offset = pos + key.len();
                found = Some(pos);
                break;
            }
            from = pos + key.len();
        }
    }
    found.map(|pos| source[..pos].matches('\n').count() + 1)
}

fn error(source: &str, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        line: locate(source, field),
        message: message.into(),
    }
}

/// Command-line overrides applied after preset expansion.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_iter: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Parses, expands and validates a config. Relative file paths resolve
/// against `base_dir`.
pub fn load_config(source: &str, base_dir: &Path, overrides: &Overrides) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let user: Value = serde_json::from_str(source).map_err(|e| {
        vec![ConfigError {
            field: "<document>".into(),
            line: Some(e.line()),
            message: e.to_string(),
        }]
    })?;
    let Value::Object(mut user_map) = user else {
        return Err(vec![error(source, "<document>", "config must be a JSON object")]);
    };
    let mut doc = match user_map.get("preset") {
        None => Value::Object(Default::default()),
        Some(Value::String(name)) => match preset(name) {
            Some(p) => p,
            None => {
                return Err(vec![error(
                    source,
                    "preset",
                    format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")),
                )])
            }
        },
        Some(_) => return Err(vec![error(source, "preset", "must be a string")]),
    };
    if let Some(seed) = overrides.seed {
        user_map.insert("seed".into(), seed.into());
    }
    if let Some(n) = overrides.n_iter {
        user_map.insert("n_iter".into(), n.into());
    }
    if let Some(dir) = &overrides.out_dir {
        user_map.insert("out_dir".into(), dir.display().to_string().into());
    }
    deep_merge(&mut doc, Value::Object(user_map));

    let mut cfg: ExperimentConfig = match serde_path_to_error::deserialize(&doc) {
        Ok(cfg) => cfg,
        Err(e) => {
            let (path, msg) = refine(&doc, e.path().to_string(), e.inner().to_string());
            let field = match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
                Some(name) if path == "." => name.to_string(),
                Some(name) => format!("{path}.{name}"),
                None => path,
            };
            return Err(vec![error(source, &field, msg)]);
        }
    };
    resolve_paths(&mut cfg, base_dir);
    let errors = validate(&cfg, source);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Tagged enums buffer their content, so an error inside `target` or `sampler`
/// surfaces at the enum itself. Re-reading the variant body recovers the path.
fn refine(doc: &Value, path: String, msg: String) -> (String, String) {
    fn inner<V: serde::de::DeserializeOwned>(body: Value) -> Option<(String, String)> {
        match serde_path_to_error::deserialize::<_, V>(&body) {
            Ok(_) => None,
            Err(e) => Some((e.path().to_string(), e.inner().to_string())),
        }
    }
    let Some(mut body) = doc.get(&path).cloned() else {
        return (path, msg);
    };
    let kind = body.get("kind").and_then(Value::as_str).map(str::to_string);
    if let Value::Object(m) = &mut body {
        m.remove("kind");
    }
    let found = match (path.as_str(), kind.as_deref()) {
        ("target", Some("mixture")) => inner::<MixtureTarget>(body),
        ("target", Some("linreg")) => inner::<LinregTarget>(body),
        ("target", Some("cart")) => inner::<CartTarget>(body),
        ("sampler", Some("pt")) => inner::<PtSampler>(body),
        ("sampler", Some("phs")) => inner::<PhsSampler>(body),
        _ => None,
    };
    match found {
        Some((p, m)) if p == "." => (path, m),
        Some((p, m)) => (format!("{path}.{p}"), m),
        None => (path, msg),
    }
}

fn resolve_paths(cfg: &mut ExperimentConfig, base: &Path) {
    let fix = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    match &mut cfg.target {
        TargetSpec::Linreg(LinregTarget {
            data: LinregData::Csv(p), ..
        }) => fix(p),
        TargetSpec::Cart(CartTarget { data, schema, .. }) => {
            fix(data);
            if let SchemaSource::File(p) = schema {
                fix(p);
            }
        }
        _ => {}
    }
}

/// Static checks beyond what deserialisation enforces.
pub fn validate(cfg: &ExperimentConfig, source: &str) -> Vec<ConfigError> {
    let mut errs = Vec::new();
    let mut err = |field: &str, msg: String| errs.push(error(source, field, msg));
    if cfg.n_iter == 0 {
        err("n_iter", "must be at least 1".into());
    }
    if cfg.trace_thin == 0 {
        err("trace_thin", "must be at least 1".into());
    }
    match &cfg.sampler {
        SamplerSpec::Mh => {}
        SamplerSpec::Phs(PhsSampler { chains }) => {
            if *chains < 3 {
                err("sampler.chains", format!("phs requires M >= 3 chains, got {chains}"));
            }
        }
        SamplerSpec::Pt(PtSampler {
            chains,
            temperatures,
            t_max,
            swap,
        }) => {
            if *chains < 1 {
                err("sampler.chains", "pt needs at least one chain".into());
            }
            match (temperatures, t_max) {
                (Some(_), Some(_)) => err("sampler.t_max", "give either temperatures or t_max, not both".into()),
                (None, None) => err("sampler.t_max", "give temperatures or t_max".into()),
                (Some(t), None) => {
                    if t.len() != *chains {
                        err("sampler.temperatures", format!("{} temperatures for {chains} chains", t.len()));
                    } else if let Err(e) = phs_core::samplers::TemperatureLadder::new(t.clone()) {
                        err("sampler.temperatures", e.to_string());
                    }
                }
                (None, Some(t)) => {
                    if let Err(e) = phs_core::samplers::TemperatureLadder::equally_spaced(*chains, *t) {
                        err("sampler.t_max", e.to_string());
                    }
                }
            }
            if let SwapSpec::Independent(s) = swap {
                if !(*s > 0.0 && *s < 1.0) {
                    err("sampler.swap", format!("swap probability {s} must lie in (0, 1)"));
                }
            }
        }
    }
    match &cfg.target {
        TargetSpec::Mixture(MixtureTarget { delta, init, histogram, .. }) => {
            if !(*delta > 0.0 && delta.is_finite()) {
                err("target.delta", format!("proposal half-width must be positive, got {delta}"));
            }
            if !init.is_finite() {
                err("target.init", "must be finite".into());
            }
            if !(histogram.lo < histogram.hi) || histogram.bins == 0 {
                err("target.histogram", "need lo < hi and at least one bin".into());
            }
        }
        TargetSpec::Linreg(LinregTarget { data, .. }) => match data {
            LinregData::Csv(p) => {
                if !p.is_file() {
                    err("target.data.csv", format!("file {} does not exist", p.display()));
                }
            }
            LinregData::Generate(config) => {
                if config.p == 0 || config.n <= config.p {
                    err("target.data.generate", format!("need n > p >= 1, got n = {}, p = {}", config.n, config.p));
                }
                if !(config.noise_variance > 0.0) {
                    err("target.data.generate.noise_variance", "must be positive".into());
                }
            }
        },
        TargetSpec::Cart(CartTarget {
            data,
            schema,
            max_leaves,
            ..
        }) => {
            if !data.is_file() {
                err("target.data", format!("file {} does not exist", data.display()));
            }
            if let SchemaSource::File(p) = schema {
                if !p.is_file() {
                    err("target.schema", format!("file {} does not exist", p.display()));
                }
            }
            if *max_leaves == 0 {
                err("target.max_leaves", "must be at least 1".into());
            }
        }
    }
    errs
}
