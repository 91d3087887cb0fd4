//! Per-user topical distributions and the cross-network analyses built on them.
//!
//! All matrices are `T × K^t` with row `t - 1` holding interval `t`. Users
//! follow the dataset ordering, so `absolute[u]` belongs to `dataset.users()[u]`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, NetworkId};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Counts of each user's non-hidden interactions on `network`, per interval and topic.
pub fn absolute_distributions(dataset: &Dataset, network: NetworkId) -> Result<Vec<Matrix>> {
    dataset.require_intervals()?;
    let intervals = dataset.num_intervals() as usize;
    let topics = dataset.num_topics();
    let mut out = vec![Matrix::zeros(intervals, topics); dataset.users().len()];
    for r in dataset.interactions() {
        if r.network != network || r.hidden || r.interval as usize > intervals {
            continue;
        }
        let user = dataset.user_index(&r.user).ok_or_else(|| Error::UnknownUser(r.user.clone()))?;
        out[user][(r.interval as usize - 1, dataset.topic_of(r) as usize)] += 1.0;
    }
    Ok(out)
}

/// Divides each row by its sum; all-zero rows stay zero.
pub fn normalize_timewise(absolute: &Matrix) -> Matrix {
    let mut out = absolute.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|x| *x /= sum);
        }
    }
    out
}

/// Entry `(t, k)` is the total count of topic `k` in interval `t` over all users.
pub fn network_totals(absolute: &[Matrix], num_intervals: usize, num_topics: usize) -> Matrix {
    let mut totals = Matrix::zeros(num_intervals, num_topics);
    for a in absolute {
        for (acc, x) in totals.as_mut_slice().iter_mut().zip(a.as_slice()) {
            *acc += x;
        }
    }
    totals
}

/// Each user's counts relative to the network totals, with `0 / 0 = 0`.
pub fn relative_distributions(absolute: &[Matrix], totals: &Matrix) -> Vec<Matrix> {
    absolute
        .iter()
        .map(|a| {
            let mut rel = a.clone();
            for (x, &total) in rel.as_mut_slice().iter_mut().zip(totals.as_slice()) {
                *x = if total > 0.0 { *x / total } else { 0.0 };
            }
            rel
        })
        .collect()
}

/// Mean share of a user's target preferences also expressed on the source
/// network, over intervals where the user has target activity.
pub fn preference_overlap(source_normalized: &Matrix, target_normalized: &Matrix) -> Result<f64> {
    if source_normalized.rows() != target_normalized.rows() {
        return Err(Error::DimensionMismatch {
            what: "overlap intervals",
            expected: target_normalized.rows(),
            found: source_normalized.rows(),
        });
    }
    let mut sum = 0.0;
    let mut counted = 0usize;
    for t in 0..target_normalized.rows() {
        let tgt = target_normalized.row(t);
        let denom: f64 = tgt.iter().sum();
        if denom <= 0.0 {
            continue;
        }
        let shared: f64 = source_normalized.row(t).iter().zip(tgt).map(|(s, t)| s.min(*t)).sum();
        sum += shared / denom;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::UndefinedOverlap);
    }
    Ok(sum / counted as f64)
}

/// Histogram intersection of every adjacent interval pair. Entry `t - 1`
/// belongs to the pair `(t, t + 1)`; `None` when either row is empty.
pub fn consecutive_intersection_series(target_normalized: &Matrix) -> Vec<Option<f64>> {
    (1..target_normalized.rows())
        .map(|t| {
            let prev = target_normalized.row(t - 1);
            let next = target_normalized.row(t);
            let nonempty = |row: &[f64]| row.iter().sum::<f64>() > 0.0;
            (nonempty(prev) && nonempty(next)).then(|| prev.iter().zip(next).map(|(a, b)| a.min(*b)).sum())
        })
        .collect()
}

pub fn consecutive_intersection(target_normalized: &Matrix) -> Result<f64> {
    let valid: Vec<f64> = consecutive_intersection_series(target_normalized).into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::UndefinedIntersection);
    }
    Ok(valid.iter().sum::<f64>() / valid.len() as f64)
}

/// Network-level topic preferences for both networks and how strongly each
/// topic leans toward one of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub source_share: Vec<f64>,
    pub target_share: Vec<f64>,
    /// `|source - target| / max(source, target)`, zero when both shares are zero.
    pub ratio: Vec<f64>,
    /// Per interval, each network's topic counts normalized by that interval's total.
    pub source_series: Vec<Vec<f64>>,
    pub target_series: Vec<Vec<f64>>,
    pub topics_at_least_70: Vec<usize>,
    pub topics_at_least_80: Vec<usize>,
}

impl BiasReport {
    pub fn fraction_at_least_80(&self) -> f64 {
        self.topics_at_least_80.len() as f64 / self.ratio.len().max(1) as f64
    }

    pub fn fraction_at_least_70(&self) -> f64 {
        self.topics_at_least_70.len() as f64 / self.ratio.len().max(1) as f64
    }
}

pub fn network_bias_report(dataset: &Dataset) -> Result<BiasReport> {
    dataset.require_intervals()?;
    let intervals = dataset.num_intervals() as usize;
    let topics = dataset.num_topics();
    let mut counts = [Matrix::zeros(intervals, topics), Matrix::zeros(intervals, topics)];
    for r in dataset.interactions() {
        if r.hidden || r.interval as usize > intervals {
            continue;
        }
        counts[r.network as usize][(r.interval as usize - 1, dataset.topic_of(r) as usize)] += 1.0;
    }
    let share = |m: &Matrix| {
        let mut per_topic = vec![0.0; topics];
        for row in 0..m.rows() {
            for (acc, x) in per_topic.iter_mut().zip(m.row(row)) {
                *acc += x;
            }
        }
        let total: f64 = per_topic.iter().sum();
        if total > 0.0 {
            per_topic.iter_mut().for_each(|x| *x /= total);
        }
        per_topic
    };
    let series = |m: &Matrix| normalize_timewise(m).to_rows();
    let source_share = share(&counts[0]);
    let target_share = share(&counts[1]);
    let ratio: Vec<f64> = source_share
        .iter()
        .zip(&target_share)
        .map(|(&s, &intervals)| {
            let hi = s.max(intervals);
            if hi > 0.0 {
                (s - intervals).abs() / hi
            } else {
                0.0
            }
        })
        .collect();
    let above = |threshold: f64| ratio.iter().enumerate().filter(|(_, &r)| r >= threshold).map(|(i, _)| i).collect();
    Ok(BiasReport {
        topics_at_least_70: above(0.7),
        topics_at_least_80: above(0.8),
        source_series: series(&counts[0]),
        target_series: series(&counts[1]),
        source_share,
        target_share,
        ratio,
    })
}

/// Absolute, normalized and relative distributions of every user on one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkProfiles {
    pub network: NetworkId,
    pub absolute: Vec<Matrix>,
    pub normalized: Vec<Matrix>,
    pub relative: Vec<Matrix>,
    pub totals: Matrix,
}

impl NetworkProfiles {
    pub fn build(dataset: &Dataset, network: NetworkId) -> Result<Self> {
        let absolute = absolute_distributions(dataset, network)?;
        let totals = network_totals(&absolute, dataset.num_intervals() as usize, dataset.num_topics());
        let normalized = absolute.iter().map(normalize_timewise).collect();
        let relative = relative_distributions(&absolute, &totals);
        Ok(Self {
            network,
            absolute,
            normalized,
            relative,
            totals,
        })
    }
}

/// Source and target profiles over the same user population.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicalProfiles {
    pub source: NetworkProfiles,
    pub target: NetworkProfiles,
}

impl TopicalProfiles {
    pub fn build(dataset: &Dataset) -> Result<Self> {
        Ok(Self {
            source: NetworkProfiles::build(dataset, NetworkId::Source)?,
            target: NetworkProfiles::build(dataset, NetworkId::Target)?,
        })
    }

    pub fn num_users(&self) -> usize {
        self.source.absolute.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.source.totals.rows()
    }

    pub fn num_topics(&self) -> usize {
        self.source.totals.cols()
    }
}

/// Feasibility and bias analysis of a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// Per user (dataset order); `None` when undefined for that user.
    pub overlap: Vec<Option<f64>>,
    pub mean_overlap: Option<f64>,
    pub consecutive_intersection: Vec<Option<f64>>,
    pub mean_consecutive_intersection: Option<f64>,
    /// Mean over users of each adjacent pair's intersection; entry `t - 1`
    /// belongs to the pair `(t, t + 1)`.
    pub intersection_series: Vec<Option<f64>>,
    pub bias: BiasReport,
}

fn mean_of_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn analyze(dataset: &Dataset) -> Result<Analysis> {
    let profiles = TopicalProfiles::build(dataset)?;
    let overlap: Vec<Option<f64>> = profiles
        .source
        .normalized
        .iter()
        .zip(&profiles.target.normalized)
        .map(|(s, t)| preference_overlap(s, t).ok())
        .collect();
    let consecutive: Vec<Option<f64>> = profiles
        .target
        .normalized
        .iter()
        .map(|t| consecutive_intersection(t).ok())
        .collect();
    let per_user_series: Vec<Vec<Option<f64>>> = profiles.target.normalized.iter().map(consecutive_intersection_series).collect();
    let pairs = profiles.num_intervals().saturating_sub(1);
    let intersection_series = (0..pairs)
        .map(|p| mean_of_defined(&per_user_series.iter().map(|s| s[p]).collect::<Vec<_>>()))
        .collect();
    Ok(Analysis {
        mean_overlap: mean_of_defined(&overlap),
        mean_consecutive_intersection: mean_of_defined(&consecutive),
        overlap,
        consecutive_intersection: consecutive,
        intersection_series,
        bias: network_bias_report(dataset)?,
    })
}
