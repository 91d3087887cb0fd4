//! Subcommand implementations. Each returns whether it fully succeeded;
//! input and configuration problems surface as errors.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use crossrec_core::baselines;
use crossrec_core::corpus::{self, Dataset, Granularity, GranularityKind, NetworkId, Partition};
use crossrec_core::eval::{self, Method};
use crossrec_core::model::{self, TrainOptions};
use crossrec_core::prefmatrix::{build_binary, build_decayed};
use crossrec_core::synth::{self, SynthConfig};
use crossrec_core::topics::{self, TopicalProfiles};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{ConfigError, RunConfig};
use crate::io;
use crate::modelfile::{self, ModelFile};
use crate::report;

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some cells or users failed; the rest of the output was written.
    Partial,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn pretty<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn load(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let interactions = cfg.require_path(&cfg.interactions, "interactions")?;
    let catalog = cfg.require_path(&cfg.catalog, "catalog")?;
    let num_topics = u32::try_from(cfg.num_topics).context("num_topics is too large")?;
    Ok(io::load_dataset(interactions, catalog, num_topics)?)
}

fn granularity(kind: GranularityKind, window_start: Option<i64>, data: &Dataset) -> anyhow::Result<Granularity> {
    let start = match window_start {
        Some(s) => s,
        None => match data.interactions().iter().map(|r| r.ts).min() {
            Some(s) => s,
            None => bail!("the dataset is empty after filtering"),
        },
    };
    Ok(match kind {
        GranularityKind::Biweekly => Granularity::biweekly(start),
        GranularityKind::Monthly => Granularity::monthly(start),
    })
}

/// Filtered data with intervals assigned.
fn prepared(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let raw = load(cfg)?;
    let filtered = corpus::filter_activity(&raw, cfg.min_user_interactions, cfg.min_item_interactions);
    let g = granularity(cfg.granularity, cfg.window_start, &filtered)?;
    Ok(corpus::assign_intervals(&filtered, g)?)
}

#[derive(Serialize)]
struct NetworkSummary {
    interactions: usize,
    items: usize,
}

#[derive(Serialize)]
struct IngestSummary {
    interactions: usize,
    users: usize,
    source: NetworkSummary,
    target: NetworkSummary,
    catalog_items: [usize; 2],
    filtered_interactions: usize,
    filtered_users: usize,
    granularity: GranularityKind,
    window_start: i64,
    intervals: u32,
}

fn network_summary(ds: &Dataset, network: NetworkId) -> NetworkSummary {
    let records: Vec<_> = ds.interactions().iter().filter(|r| r.network == network).collect();
    let items: BTreeSet<&str> = records.iter().map(|r| r.item.as_str()).collect();
    NetworkSummary {
        interactions: records.len(),
        items: items.len(),
    }
}

pub fn ingest(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let raw = load(cfg)?;
    let filtered = corpus::filter_activity(&raw, cfg.min_user_interactions, cfg.min_item_interactions);
    let g = granularity(cfg.granularity, cfg.window_start, &filtered)?;
    let assigned = corpus::assign_intervals(&filtered, g)?;
    let summary = IngestSummary {
        interactions: raw.len(),
        users: raw.users().len(),
        source: network_summary(&raw, NetworkId::Source),
        target: network_summary(&raw, NetworkId::Target),
        catalog_items: [raw.catalog().len(NetworkId::Source), raw.catalog().len(NetworkId::Target)],
        filtered_interactions: assigned.len(),
        filtered_users: assigned.users().len(),
        granularity: cfg.granularity,
        window_start: g.window_start,
        intervals: assigned.num_intervals(),
    };
    out.write_all(pretty(&summary)?.as_bytes())?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct AnalysisFile<'a> {
    granularity: GranularityKind,
    window_start: i64,
    intervals: u32,
    users: &'a [String],
    #[serde(flatten)]
    analysis: &'a topics::Analysis,
}

pub fn analyze(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let ds = prepared(cfg)?;
    let analysis = topics::analyze(&ds)?;
    let g = ds.granularity().expect("intervals were assigned");
    let file = AnalysisFile {
        granularity: g.kind,
        window_start: g.window_start,
        intervals: ds.num_intervals(),
        users: ds.users(),
        analysis: &analysis,
    };
    write_file(&cfg.out_dir, "analysis.json", &pretty(&file)?)?;
    if cfg.csv {
        write_file(&cfg.out_dir, "users.csv", &report::users_csv(ds.users(), &analysis)?)?;
        write_file(&cfg.out_dir, "series.csv", &report::series_csv(&analysis)?)?;
        write_file(&cfg.out_dir, "bias.csv", &report::bias_csv(&analysis)?)?;
    }
    Ok(Outcome::Success)
}

/// The training view: data up to `train_intervals`, users partitioned and
/// new users' target history hidden.
fn training_view(assigned: &Dataset, train_intervals: Option<u32>) -> anyhow::Result<Partition> {
    let data = match train_intervals {
        Some(t) => assigned.restrict_intervals(t)?,
        None => assigned.clone(),
    };
    Ok(corpus::partition_users(&data)?)
}

pub fn train(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    if !matches!(cfg.method, Method::Proposed | Method::Acnrs) {
        return Err(ConfigError::Invalid(format!("train supports the proposed and acnrs methods, not {}", cfg.method)).into());
    }
    let ds = prepared(cfg)?;
    let partition = training_view(&ds, cfg.train_intervals)?;
    let train = &partition.train;
    let hp = cfg.hyperparams();
    let profiles = TopicalProfiles::build(train)?;
    let existing = model::group_mask(train.users(), &partition.existing.members);

    let decayed = build_decayed(train, hp.beta, train.num_intervals())?;
    if decayed.max_value() > cfg.magnitude_warning {
        writeln!(
            err,
            "warning: decayed preference values reach {:e}, above {:e}; consider a smaller beta or learning rate",
            decayed.max_value(),
            cfg.magnitude_warning
        )?;
    }
    let trained = match cfg.method {
        Method::Acnrs => baselines::acnrs(train, &profiles, &build_binary(train)?, &existing, &hp)?,
        _ => model::train(train, &profiles, &decayed, &existing, &hp, TrainOptions::default())?,
    };

    let file = ModelFile {
        format: modelfile::FORMAT.into(),
        version: modelfile::VERSION,
        method: cfg.method,
        hyperparams: hp,
        granularity: ds.granularity().expect("intervals were assigned"),
        min_user_interactions: cfg.min_user_interactions,
        min_item_interactions: cfg.min_item_interactions,
        trained_intervals: train.num_intervals(),
        users: train.users().to_vec(),
        items: train.items().to_vec(),
        new_users: partition.new.members.iter().cloned().collect(),
        losses: trained.losses.clone(),
        state: trained.state,
    };
    write_file(&cfg.out_dir, "model.json", &file.to_json())?;
    let mut csv = String::from("epoch,loss\n");
    for (e, l) in trained.losses.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", e + 1, l));
    }
    write_file(&cfg.out_dir, "losses.csv", &csv)?;
    match trained.losses.last() {
        Some(l) => writeln!(out, "final loss: {l}")?,
        None => writeln!(out, "no epochs run; model holds its initialization")?,
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct RecommendLine<'a> {
    user: &'a str,
    rank: usize,
    item: &'a str,
    score: f64,
    truncated: bool,
}

#[derive(Serialize)]
struct RecommendError<'a> {
    user: &'a str,
    error: String,
}

pub fn recommend(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let model_path = cfg.require_path(&cfg.model, "model")?;
    let file = ModelFile::load(model_path)?;
    if cfg.n == 0 {
        return Err(ConfigError::Invalid("n must be at least 1".into()).into());
    }
    // Rebuild exactly the view the model was trained on.
    let raw = load(cfg)?;
    let filtered = corpus::filter_activity(&raw, file.min_user_interactions, file.min_item_interactions);
    let assigned = corpus::assign_intervals(&filtered, file.granularity)?;
    let partition = training_view(&assigned, Some(file.trained_intervals))?;
    let train = &partition.train;
    if train.users() != file.users.as_slice() || train.items() != file.items.as_slice() {
        bail!("the data files do not match the users and items of {}", model_path.display());
    }
    let profiles = TopicalProfiles::build(train)?;
    file.state.check_profiles(&profiles)?;

    let mut seen = vec![BTreeSet::new(); train.users().len()];
    if cfg.exclude_train_items {
        for r in train.interactions().iter().filter(|r| r.network == NetworkId::Target && !r.hidden) {
            if let (Some(u), Some(j)) = (train.user_index(&r.user), train.item_index(&r.item)) {
                seen[u].insert(j);
            }
        }
    }
    let users: Vec<String> = if cfg.users.is_empty() {
        file.users.clone()
    } else {
        cfg.users.clone()
    };
    let mut outcome = Outcome::Success;
    for user in &users {
        let Some(u) = train.user_index(user) else {
            serde_json::to_writer(
                &mut *out,
                &RecommendError {
                    user,
                    error: "unknown user".into(),
                },
            )?;
            out.write_all(b"\n")?;
            outcome = Outcome::Partial;
            continue;
        };
        let scores = model::predict_user(&file.state, &profiles, u)?;
        if scores.iter().all(|&s| s == 0.0) {
            writeln!(
                err,
                "warning: user {user} has no source history in the training window; no recommendations"
            )?;
            continue;
        }
        let ranking = model::top_n(&scores, cfg.n, &seen[u])?;
        for (rank, &(j, score)) in ranking.entries.iter().enumerate() {
            serde_json::to_writer(
                &mut *out,
                &RecommendLine {
                    user,
                    rank: rank + 1,
                    item: &file.items[j],
                    score,
                    truncated: ranking.truncated,
                },
            )?;
            out.write_all(b"\n")?;
        }
    }
    Ok(outcome)
}

pub fn evaluate(cfg: &RunConfig, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let cells = cfg.cells()?;
    let eval_cfg = cfg.eval_config();
    eval_cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let raw = load(cfg)?;
    let data = corpus::filter_activity(&raw, cfg.min_user_interactions, cfg.min_item_interactions);
    let report = eval::evaluate(&data, &cells, &eval_cfg)?;
    write_file(&cfg.out_dir, "report.json", &pretty(&report)?)?;
    write_file(&cfg.out_dir, "report.csv", &report::eval_csv(&report)?)?;
    let mut outcome = Outcome::Success;
    for cell in &report.cells {
        if let eval::CellOutcome::Failed { error } = &cell.outcome {
            writeln!(err, "error: experiment {} failed: {error}", cell.cell.name)?;
            outcome = Outcome::Partial;
        }
    }
    Ok(outcome)
}

pub fn synth(mut map: Map<String, Value>) -> anyhow::Result<Outcome> {
    let out_dir = match map.remove("out_dir") {
        Some(Value::String(s)) => s.into(),
        Some(_) => return Err(ConfigError::Invalid("out_dir must be a string".into()).into()),
        None => std::path::PathBuf::from("."),
    };
    let cfg: SynthConfig = serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let generated = synth::generate(&cfg)?;
    fs::create_dir_all(&out_dir).with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    io::write_interactions(&out_dir.join("interactions.jsonl"), &generated.dataset)?;
    io::write_catalog(&out_dir.join("catalog.jsonl"), generated.dataset.catalog())?;
    write_file(&out_dir, "truth.json", &pretty(&generated.truth)?)?;
    Ok(Outcome::Success)
}
