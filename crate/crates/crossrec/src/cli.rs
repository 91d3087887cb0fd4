//! Command-line surface. Every flag mirrors a key of the JSON config and
//! overrides it when given.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use crossrec_core::corpus::GranularityKind;
use crossrec_core::eval::Method;
use crossrec_core::model::NegativeSampling;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Parser)]
#[command(name = "crossrec", version, about = "Time-aware cross-network recommender")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the input files and print a dataset summary
    Ingest(IngestArgs),
    /// Topical overlap, drift and network bias statistics
    Analyze(AnalyzeArgs),
    /// Train a model and write model.json and losses.csv
    Train(TrainArgs),
    /// Print Top-N recommendations as JSON lines
    Recommend(RecommendArgs),
    /// Run the experiment grid and write report.json and report.csv
    Evaluate(EvaluateArgs),
    /// Generate a synthetic dataset with planted structure
    Synth(SynthArgs),
}

fn parse_negatives(s: &str) -> Result<NegativeSampling, String> {
    if s == "all" {
        return Ok(NegativeSampling::ALL);
    }
    s.parse::<f64>()
        .map(NegativeSampling::Ratio)
        .map_err(|_| format!("expected a ratio or `all`, got `{s}`"))
}

fn parse_granularity(s: &str) -> Result<GranularityKind, String> {
    match s {
        "biweekly" => Ok(GranularityKind::Biweekly),
        "monthly" => Ok(GranularityKind::Monthly),
        _ => Err(format!("expected `biweekly` or `monthly`, got `{s}`")),
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
        .map_err(|_| format!("expected one of timepop, tbknn, timemf, acnrs, proposed, got `{s}`"))
}

/// Flags shared by every subcommand that reads the data files.
#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Flat JSON configuration file; flags override its keys
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Interaction log (JSON lines)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interactions: Option<PathBuf>,
    /// Item catalog (JSON lines)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    /// Directory for output files
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Random seed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of topics in the catalog
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_topics: Option<usize>,
    /// Interval length: biweekly or monthly
    #[arg(long, value_parser = parse_granularity)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granularity: Option<GranularityKind>,
    /// Start of the first interval, seconds since the epoch (default: earliest timestamp)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<i64>,
    /// Drop users with fewer interactions than this on either network
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_user_interactions: Option<usize>,
    /// Drop target items with fewer interactions than this
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_item_interactions: Option<usize>,
}

/// Training hyperparameters.
#[derive(Debug, Args, Serialize)]
pub struct HyperArgs {
    /// Latent dimensionality
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latent_dim: Option<usize>,
    /// Regularization weight
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Learning rate
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Recency weight of the decayed preference matrix
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Weight of target-network activity in the per-interval weights
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// SGD epochs
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// Negatives per positive, or `all`
    #[arg(long, value_parser = parse_negatives)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negatives: Option<NegativeSampling>,
    /// Half-width of the uniform initialization
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_scale: Option<f64>,
    /// Warn when a decayed preference value exceeds this
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magnitude_warning: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Also write users.csv, series.csv and bias.csv
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub csv: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Model to train: proposed or acnrs
    #[arg(long, value_parser = parse_method)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// Train on intervals 1..=N only (default: all)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_intervals: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct RecommendArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Trained model file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Users to recommend for; repeat or comma-separate (default: all users)
    #[arg(long = "user", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub users: Vec<String>,
    /// List length
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Leave items the user already interacted with out of the list (true or false)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_train_items: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Methods to compare; repeat or comma-separate
    #[arg(long = "method", value_delimiter = ',', value_parser = parse_method)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<Method>,
    /// Standard experiments to run: exp1, exp2, exp3, exp4
    #[arg(long = "experiment", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<String>,
    /// Training intervals of a custom cell (needs --test-intervals)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_intervals: Option<u32>,
    /// Test intervals of a custom cell (needs --train-intervals)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_intervals: Option<u32>,
    /// List lengths to score
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub top_n: Vec<usize>,
    /// Seeds to average over (default: --seed)
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Neighbourhood sizes for tbknn, averaged
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub knn_k: Vec<usize>,
    /// Leave each user's training items out of their list (true or false)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_train_items: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Flat JSON configuration file; flags override its keys
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory for interactions.jsonl, catalog.jsonl and truth.json
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Random seed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_users: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_source_items: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_target_items: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_topics: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_intervals: Option<u32>,
    /// Interval length: biweekly or monthly
    #[arg(long, value_parser = parse_granularity)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub granularity: Option<GranularityKind>,
    /// Start of the first interval, seconds since the epoch
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<i64>,
    /// Topics each user prefers
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics_per_user: Option<usize>,
    /// Interval at which preferences shift
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_interval: Option<u32>,
    /// Share of preference mass moved at the drift interval
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_magnitude: Option<f64>,
    /// Cross-network preference correlation in [0, 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Zipf exponent of item popularity within a topic
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub popularity_exponent: Option<f64>,
}

/// The flags that were actually given, as config keys.
pub fn overrides<T: Serialize>(args: &T) -> Map<String, Value> {
    match serde_json::to_value(args).expect("flag values are plain data") {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    }
}
