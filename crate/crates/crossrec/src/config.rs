//! The flat JSON run configuration shared by every subcommand.
//!
//! A configuration file is a single JSON object. Command-line flags are
//! folded into that object before it is parsed, so a flag always wins over
//! the file and both go through the same validation.

use std::path::{Path, PathBuf};

use crossrec_core::corpus::GranularityKind;
use crossrec_core::eval::{EvalConfig, ExperimentCell, Method};
use crossrec_core::model::{Hyperparams, NegativeSampling};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub interactions: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out_dir: PathBuf,

    pub latent_dim: usize,
    pub num_topics: usize,
    pub lambda: f64,
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epochs: usize,
    pub negatives: NegativeSampling,
    pub seed: u64,
    pub init_scale: f64,

    pub granularity: GranularityKind,
    pub window_start: Option<i64>,
    pub min_user_interactions: usize,
    pub min_item_interactions: usize,
    /// Training intervals for `train`; all intervals when absent. With
    /// `test_intervals` it also defines a custom cell for `evaluate`.
    pub train_intervals: Option<u32>,
    pub test_intervals: Option<u32>,

    /// Model trained by `train`.
    pub method: Method,
    /// Methods compared by `evaluate`.
    pub methods: Vec<Method>,
    pub experiments: Vec<String>,
    pub top_n: Vec<usize>,
    /// Seeds for `evaluate`; `[seed]` when absent.
    pub seeds: Option<Vec<u64>>,
    pub knn_k: Vec<usize>,
    pub exclude_train_items: bool,

    pub users: Vec<String>,
    pub n: usize,

    /// Warn when a decayed preference entry exceeds this value.
    pub magnitude_warning: f64,
    /// `analyze` also writes CSV series.
    pub csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hp = Hyperparams::default();
        let eval = EvalConfig::default();
        Self {
            interactions: None,
            catalog: None,
            model: None,
            out_dir: PathBuf::from("."),
            latent_dim: hp.latent_dim,
            num_topics: hp.num_topics,
            lambda: hp.lambda,
            mu: hp.mu,
            beta: hp.beta,
            gamma: hp.gamma,
            epochs: hp.epochs,
            negatives: hp.negatives,
            seed: hp.seed,
            init_scale: hp.init_scale,
            granularity: GranularityKind::Monthly,
            window_start: None,
            min_user_interactions: 5,
            min_item_interactions: 2,
            train_intervals: None,
            test_intervals: None,
            method: Method::Proposed,
            methods: eval.methods,
            experiments: ExperimentCell::standard_grid().into_iter().map(|c| c.name).collect(),
            top_n: eval.top_n,
            seeds: None,
            knn_k: eval.knn_k,
            exclude_train_items: eval.exclude_train_items,
            users: Vec::new(),
            n: 10,
            magnitude_warning: 1e6,
            csv: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("config {path}: expected a single JSON object")]
    NotAnObject { path: PathBuf },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Reads a config file as a JSON object; an absent path yields `{}`.
pub fn read_object(path: Option<&Path>) -> Result<Map<String, Value>, ConfigError> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    match serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })? {
        Value::Object(map) => Ok(map),
        _ => Err(ConfigError::NotAnObject { path: path.into() }),
    }
}

const PATH_KEYS: [&str; 4] = ["interactions", "catalog", "model", "out_dir"];

/// Reads a config file and resolves its relative paths against the file's
/// own directory, so a config works from any working directory.
pub fn read_file_config(path: Option<&Path>) -> Result<Map<String, Value>, ConfigError> {
    let mut map = read_object(path)?;
    let base = path.and_then(Path::parent).filter(|p| !p.as_os_str().is_empty());
    if let Some(base) = base {
        for key in PATH_KEYS {
            if let Some(Value::String(s)) = map.get(key) {
                if Path::new(s).is_relative() {
                    let joined = base.join(s).to_string_lossy().into_owned();
                    map.insert(key.into(), Value::String(joined));
                }
            }
        }
    }
    Ok(map)
}

/// Overlays the keys of `overrides` onto `base`.
pub fn merge(mut base: Map<String, Value>, overrides: Map<String, Value>) -> Map<String, Value> {
    base.extend(overrides);
    base
}

impl RunConfig {
    pub fn from_object(map: Map<String, Value>) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.hyperparams().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            latent_dim: self.latent_dim,
            num_topics: self.num_topics,
            lambda: self.lambda,
            mu: self.mu,
            beta: self.beta,
            gamma: self.gamma,
            epochs: self.epochs,
            negatives: self.negatives,
            seed: self.seed,
            init_scale: self.init_scale,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            methods: self.methods.clone(),
            hyperparams: self.hyperparams(),
            seeds: self.seeds.clone().unwrap_or_else(|| vec![self.seed]),
            top_n: self.top_n.clone(),
            knn_k: self.knn_k.clone(),
            exclude_train_items: self.exclude_train_items,
            window_start: self.window_start,
        }
    }

    /// The cells `evaluate` runs: a custom cell when both interval counts
    /// are set, otherwise the named standard experiments.
    pub fn cells(&self) -> Result<Vec<ExperimentCell>, ConfigError> {
        if let (Some(train), Some(test)) = (self.train_intervals, self.test_intervals) {
            return Ok(vec![ExperimentCell::new("custom", self.granularity, train, test)]);
        }
        let grid = ExperimentCell::standard_grid();
        self.experiments
            .iter()
            .map(|name| {
                grid.iter()
                    .find(|c| &c.name == name)
                    .cloned()
                    .ok_or_else(|| ConfigError::Invalid(format!("unknown experiment `{name}` (expected exp1..exp4)")))
            })
            .collect()
    }

    pub fn require_path<'a>(&'a self, path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, ConfigError> {
        path.as_deref()
            .ok_or_else(|| ConfigError::Invalid(format!("`{key}` is required for this command")))
    }
}
