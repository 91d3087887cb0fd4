//! Experiment runner: temporal split, user partition, training of every
//! requested method, Top-N ranking and per-group scoring.
//!
//! Rankings of every user are computed once at the largest requested `N`
//! and truncated for smaller ones. Per-user metrics are averaged in user
//! order within a group, then averaged across seeds, so a report depends
//! only on its inputs.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, Tbknn, TimeMfConfig};
use crate::corpus::{self, Dataset, Granularity, GranularityKind, GroupKind, NetworkId};
use crate::metrics;
use crate::model::{self, Hyperparams, Ranking, TrainOptions};
use crate::prefmatrix::{build_binary, build_decayed};
use crate::topics::TopicalProfiles;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    TimePop,
    Tbknn,
    TimeMf,
    Acnrs,
    Proposed,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::TimePop, Method::Tbknn, Method::TimeMf, Method::Acnrs, Method::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::TimePop => "timepop",
            Method::Tbknn => "tbknn",
            Method::TimeMf => "timemf",
            Method::Acnrs => "acnrs",
            Method::Proposed => "proposed",
        }
    }

    /// KNN and plain factorization need target history, so they cannot serve
    /// users whose target interactions are hidden.
    pub fn serves(self, group: GroupKind) -> bool {
        group == GroupKind::Existing || !matches!(self, Method::Tbknn | Method::TimeMf)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or(Error::InvalidParameter {
            name: "method",
            reason: "expected one of timepop, tbknn, timemf, acnrs, proposed",
        })
    }
}

/// One experiment setting: granularity and how many intervals go to
/// training and testing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCell {
    pub name: String,
    pub granularity: GranularityKind,
    pub train_intervals: u32,
    pub test_intervals: u32,
}

impl ExperimentCell {
    pub fn new(name: &str, granularity: GranularityKind, train_intervals: u32, test_intervals: u32) -> Self {
        Self {
            name: name.into(),
            granularity,
            train_intervals,
            test_intervals,
        }
    }

    /// The four standard settings: 40 weeks of data in biweekly or monthly
    /// intervals, with two different split points each.
    pub fn standard_grid() -> Vec<Self> {
        vec![
            Self::new("exp1", GranularityKind::Biweekly, 20, 4),
            Self::new("exp2", GranularityKind::Biweekly, 22, 2),
            Self::new("exp3", GranularityKind::Monthly, 10, 2),
            Self::new("exp4", GranularityKind::Monthly, 11, 1),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub methods: Vec<Method>,
    pub hyperparams: Hyperparams,
    pub seeds: Vec<u64>,
    pub top_n: Vec<usize>,
    pub knn_k: Vec<usize>,
    /// Hide each user's visible training items from their ranking.
    pub exclude_train_items: bool,
    /// Start of interval 1; defaults to the earliest timestamp.
    pub window_start: Option<i64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            hyperparams: Hyperparams::default(),
            seeds: vec![0],
            top_n: vec![5, 10, 15, 20],
            knn_k: vec![4, 10, 20, 30, 40, 50],
            exclude_train_items: true,
            window_start: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.methods.is_empty() {
            return bad("methods", "at least one method is required");
        }
        if self.seeds.is_empty() {
            return bad("seeds", "at least one seed is required");
        }
        if self.top_n.is_empty() || self.top_n.contains(&0) {
            return bad("top_n", "values must be at least 1 and the list non-empty");
        }
        if self.methods.contains(&Method::Tbknn) && (self.knn_k.is_empty() || self.knn_k.contains(&0)) {
            return bad("knn_k", "values must be at least 1 and the list non-empty");
        }
        Ok(())
    }
}

/// Mean and population standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Stat {
            mean,
            std: libm::sqrt(var),
        })
    }
}

/// Scores of one method for one user group at one list length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub group: GroupKind,
    pub n: usize,
    pub applicable: bool,
    /// Users with a non-empty test set, the common accuracy denominator.
    pub users_scored: usize,
    pub precision: Option<Stat>,
    pub recall: Option<Stat>,
    pub f1: Option<Stat>,
    pub diversity: Option<Stat>,
    pub novelty: Option<Stat>,
    /// Users whose list was too short for a diversity value, summed over seeds.
    pub diversity_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    pub existing: usize,
    pub new: usize,
}

impl GroupCounts {
    fn bump(&mut self, group: GroupKind) {
        match group {
            GroupKind::Existing => self.existing += 1,
            GroupKind::New => self.new += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellOutcome {
    Ok {
        users: GroupCounts,
        /// Users without test-period target activity, excluded from averages.
        skipped_empty_test: GroupCounts,
        /// KNN queries that found fewer than `k` neighbours, summed over seeds and k.
        knn_short_neighborhoods: usize,
        rows: Vec<ReportRow>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: ExperimentCell,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

impl CellReport {
    pub fn failed(&self) -> bool {
        matches!(self.outcome, CellOutcome::Failed { .. })
    }

    pub fn rows(&self) -> &[ReportRow] {
        match &self.outcome {
            CellOutcome::Ok { rows, .. } => rows,
            CellOutcome::Failed { .. } => &[],
        }
    }

    pub fn row(&self, method: Method, group: GroupKind, n: usize) -> Option<&ReportRow> {
        self.rows().iter().find(|r| r.method == method && r.group == group && r.n == n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub cells: Vec<CellReport>,
}

impl EvalReport {
    pub fn any_failed(&self) -> bool {
        self.cells.iter().any(CellReport::failed)
    }
}

/// Runs every cell; a failing cell is recorded and the rest still run.
pub fn evaluate(dataset: &Dataset, cells: &[ExperimentCell], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let cells = cells
        .iter()
        .map(|cell| CellReport {
            cell: cell.clone(),
            outcome: match run_experiment(dataset, cell, config) {
                Ok(outcome) => outcome,
                Err(e) => CellOutcome::Failed { error: e.to_string() },
            },
        })
        .collect();
    Ok(EvalReport {
        config: config.clone(),
        cells,
    })
}

/// Per-user observations gathered for one (method, group, n) slot.
#[derive(Default, Clone)]
struct Slot {
    /// One entry per seed: per-user metric values in user order.
    precision: Vec<Vec<f64>>,
    recall: Vec<Vec<f64>>,
    f1: Vec<Vec<f64>>,
    diversity: Vec<Vec<f64>>,
    novelty: Vec<Vec<f64>>,
    diversity_skipped: usize,
}

impl Slot {
    fn start_seed(&mut self) {
        for v in [
            &mut self.precision,
            &mut self.recall,
            &mut self.f1,
            &mut self.diversity,
            &mut self.novelty,
        ] {
            v.push(Vec::new());
        }
    }

    fn seed_means(per_seed: &[Vec<f64>]) -> Vec<f64> {
        per_seed
            .iter()
            .filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .collect()
    }
}

/// Everything that does not depend on the seed.
struct Prepared {
    train: Dataset,
    profiles: TopicalProfiles,
    existing: Vec<bool>,
    groups: Vec<GroupKind>,
    test_items: Vec<BTreeSet<usize>>,
    /// Visible training target items, excluded from rankings.
    seen_items: Vec<BTreeSet<usize>>,
    /// All training target items including hidden ones.
    history_items: Vec<BTreeSet<usize>>,
    item_topics: Vec<u32>,
}

fn prepare(dataset: &Dataset, cell: &ExperimentCell, config: &EvalConfig) -> Result<Prepared> {
    if cell.test_intervals == 0 {
        return Err(Error::InvalidParameter {
            name: "test_intervals",
            reason: "must be at least 1",
        });
    }
    let start = match config.window_start {
        Some(s) => s,
        None => dataset
            .interactions()
            .iter()
            .map(|r| r.ts)
            .min()
            .ok_or(Error::Infeasible("dataset has no interactions"))?,
    };
    let granularity = match cell.granularity {
        GranularityKind::Biweekly => Granularity::biweekly(start),
        GranularityKind::Monthly => Granularity::monthly(start),
    };
    let assigned = corpus::assign_intervals(dataset, granularity)?;
    let restricted = assigned.restrict_intervals(cell.train_intervals + cell.test_intervals)?;
    let split = corpus::time_split(&restricted, cell.train_intervals)?;
    let partition = corpus::partition_users(&split.train)?;
    let train = partition.train;
    let profiles = TopicalProfiles::build(&train)?;
    if profiles.num_topics() != config.hyperparams.num_topics {
        return Err(Error::DimensionMismatch {
            what: "topic count",
            expected: config.hyperparams.num_topics,
            found: profiles.num_topics(),
        });
    }
    let existing = model::group_mask(train.users(), &partition.existing.members);
    let groups = existing
        .iter()
        .map(|&e| if e { GroupKind::Existing } else { GroupKind::New })
        .collect();

    let history_items = train.target_items_by_user();
    let mut seen_items = vec![BTreeSet::new(); train.users().len()];
    for r in train.interactions().iter().filter(|r| r.network == NetworkId::Target && !r.hidden) {
        if let (Some(u), Some(j)) = (train.user_index(&r.user), train.item_index(&r.item)) {
            seen_items[u].insert(j);
        }
    }
    let test_items = split.test.target_items_by_user();
    let item_topics = train
        .items()
        .iter()
        .map(|id| {
            train
                .catalog()
                .topic(NetworkId::Target, id)
                .expect("dataset items always resolve in the catalog")
        })
        .collect();
    Ok(Prepared {
        train,
        profiles,
        existing,
        groups,
        test_items,
        seen_items,
        history_items,
        item_topics,
    })
}

/// Trains and scores every method of `config` on one cell.
pub fn run_experiment(dataset: &Dataset, cell: &ExperimentCell, config: &EvalConfig) -> Result<CellOutcome> {
    config.validate()?;
    let p = prepare(dataset, cell, config)?;
    let hp = &config.hyperparams;
    let max_n = *config.top_n.iter().max().expect("validated non-empty");
    let num_users = p.train.users().len();
    let no_exclusion = BTreeSet::new();
    let exclusion = |u: usize| {
        if config.exclude_train_items {
            &p.seen_items[u]
        } else {
            &no_exclusion
        }
    };

    let methods: Vec<Method> = {
        let mut m = config.methods.clone();
        m.sort();
        m.dedup();
        m
    };
    let groups = [GroupKind::Existing, GroupKind::New];
    // slots[method][group][n]
    let mut slots = vec![vec![vec![Slot::default(); config.top_n.len()]; 2]; methods.len()];
    let mut knn_short = 0;

    let decayed = build_decayed(&p.train, hp.beta, p.train.num_intervals())?;
    let binary = if methods.contains(&Method::Acnrs) {
        Some(build_binary(&p.train)?)
    } else {
        None
    };

    for &seed in &config.seeds {
        let hp = Hyperparams { seed, ..hp.clone() };
        for (mi, &method) in methods.iter().enumerate() {
            // Each entry is one list per user, or several lists to be averaged (KNN over k).
            let rankings: Vec<Option<Vec<Ranking>>> = match method {
                Method::TimePop => {
                    let r = baselines::time_pop(&p.train, max_n)?;
                    (0..num_users).map(|_| Some(vec![r.clone()])).collect()
                }
                Method::Tbknn => {
                    let knn = Tbknn::new(&decayed);
                    let mut out = Vec::with_capacity(num_users);
                    for u in 0..num_users {
                        if !p.existing[u] {
                            out.push(None);
                            continue;
                        }
                        let mut lists = Vec::with_capacity(config.knn_k.len());
                        for &k in &config.knn_k {
                            let scores = match knn.scores(u, k) {
                                Ok(s) => {
                                    knn_short += s.short as usize;
                                    s.scores
                                }
                                // An empty row has no neighbours; every item scores zero.
                                Err(Error::NotAnExistingUser(_)) => vec![0.0; p.train.items().len()],
                                Err(e) => return Err(e),
                            };
                            lists.push(model::top_n(&scores, max_n, exclusion(u))?);
                        }
                        out.push(Some(lists));
                    }
                    out
                }
                Method::TimeMf => {
                    let mf = baselines::time_mf(&decayed, &TimeMfConfig::from_hyperparams(&hp))?;
                    let mut out = Vec::with_capacity(num_users);
                    for u in 0..num_users {
                        out.push(if p.existing[u] {
                            Some(vec![model::top_n(&mf.scores(u)?, max_n, exclusion(u))?])
                        } else {
                            None
                        });
                    }
                    out
                }
                Method::Acnrs | Method::Proposed => {
                    let trained = if method == Method::Acnrs {
                        let binary = binary.as_ref().expect("built when requested");
                        baselines::acnrs(&p.train, &p.profiles, binary, &p.existing, &hp)?
                    } else {
                        model::train(&p.train, &p.profiles, &decayed, &p.existing, &hp, TrainOptions::default())?
                    };
                    let mut out = Vec::with_capacity(num_users);
                    for u in 0..num_users {
                        let scores = model::predict_user(&trained.state, &p.profiles, u)?;
                        out.push(Some(vec![model::top_n(&scores, max_n, exclusion(u))?]));
                    }
                    out
                }
            };

            for (gi, &group) in groups.iter().enumerate() {
                if !method.serves(group) {
                    continue;
                }
                for (ni, &n) in config.top_n.iter().enumerate() {
                    let slot = &mut slots[mi][gi][ni];
                    slot.start_seed();
                    for u in (0..num_users).filter(|&u| p.groups[u] == group) {
                        let test = &p.test_items[u];
                        if test.is_empty() {
                            continue;
                        }
                        let lists = rankings[u].as_ref().expect("served users always have lists");
                        let mut acc = [0.0; 5];
                        let mut div_count = 0;
                        for list in lists {
                            let items: Vec<usize> = list.prefix(n).items().collect();
                            let a = metrics::f1_at_n(&items, test, n).expect("test set is non-empty");
                            acc[0] += a.precision;
                            acc[1] += a.recall;
                            acc[2] += a.f1;
                            acc[4] += metrics::novelty(&items, test, &p.history_items[u]);
                            let topics = metrics::one_hot(items.iter().map(|&j| p.item_topics[j]), hp.num_topics);
                            if let Some(d) = metrics::diversity(&topics) {
                                acc[3] += d;
                                div_count += 1;
                            }
                        }
                        let k = lists.len() as f64;
                        let last = |v: &mut Vec<Vec<f64>>, x: f64| v.last_mut().expect("seed started").push(x);
                        last(&mut slot.precision, acc[0] / k);
                        last(&mut slot.recall, acc[1] / k);
                        last(&mut slot.f1, acc[2] / k);
                        last(&mut slot.novelty, acc[4] / k);
                        if div_count > 0 {
                            last(&mut slot.diversity, acc[3] / div_count as f64);
                        } else {
                            slot.diversity_skipped += 1;
                        }
                    }
                }
            }
        }
    }

    let mut users = GroupCounts::default();
    let mut skipped = GroupCounts::default();
    for u in 0..num_users {
        users.bump(p.groups[u]);
        if p.test_items[u].is_empty() {
            skipped.bump(p.groups[u]);
        }
    }
    let mut rows = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (gi, &group) in groups.iter().enumerate() {
            let scored = match group {
                GroupKind::Existing => users.existing - skipped.existing,
                GroupKind::New => users.new - skipped.new,
            };
            for (ni, &n) in config.top_n.iter().enumerate() {
                let slot = &slots[mi][gi][ni];
                let stat = |v: &[Vec<f64>]| Stat::of(&Slot::seed_means(v));
                rows.push(ReportRow {
                    method,
                    group,
                    n,
                    applicable: method.serves(group),
                    users_scored: if method.serves(group) { scored } else { 0 },
                    precision: stat(&slot.precision),
                    recall: stat(&slot.recall),
                    f1: stat(&slot.f1),
                    diversity: stat(&slot.diversity),
                    novelty: stat(&slot.novelty),
                    diversity_skipped: slot.diversity_skipped,
                });
            }
        }
    }
    Ok(CellOutcome::Ok {
        users,
        skipped_empty_test: skipped,
        knn_short_neighborhoods: knn_short,
        rows,
    })
}
