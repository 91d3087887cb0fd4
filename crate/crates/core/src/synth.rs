//! Seeded synthetic cross-network datasets with planted structure.
//!
//! Every user has a latent topic preference that may drift at a fixed
//! interval. Target interactions are drawn from that preference; source
//! interactions from a mixture of it (weight `rho`) and an unrelated
//! per-user distribution. Per-network bias weights reshape the topic mix on
//! each network, and a zero weight makes a topic exclusive to the other
//! network. Items carry one topic each, and items within a topic follow a
//! Zipf-like popularity.
//!
//! Generation uses a `ChaCha8` stream seeded from `seed`, and all index draws
//! go through fixed-width integers, so output is identical on every platform.

pub mod oracle;
pub mod random;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Granularity, GranularityKind, InteractionRecord, ItemCatalog, NetworkId};
use crate::{Error, Result};

/// 2015-03-01T00:00:00Z.
pub const DEFAULT_WINDOW_START: i64 = 1_425_168_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_source_items: usize,
    pub n_target_items: usize,
    pub num_topics: usize,
    pub num_intervals: u32,
    pub granularity: GranularityKind,
    pub window_start: i64,
    /// Topics carrying a user's preference mass.
    pub topics_per_user: usize,
    /// First interval using the drifted preference; `None` disables drift.
    pub drift_interval: Option<u32>,
    /// Share of preference mass moved to fresh topics at the drift.
    pub drift_magnitude: f64,
    /// How much of a user's source activity follows the target preference.
    pub rho: f64,
    /// Per-topic weights on each network; empty means all ones.
    pub source_bias: Vec<f64>,
    pub target_bias: Vec<f64>,
    /// Inclusive range of interactions per user and interval.
    pub source_per_interval: (u32, u32),
    pub target_per_interval: (u32, u32),
    /// Exponent of the within-topic item popularity `1 / rank^s`.
    pub popularity_exponent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 100,
            n_source_items: 600,
            n_target_items: 600,
            num_topics: 60,
            num_intervals: 12,
            granularity: GranularityKind::Monthly,
            window_start: DEFAULT_WINDOW_START,
            topics_per_user: 4,
            drift_interval: Some(7),
            drift_magnitude: 0.5,
            rho: 0.6,
            source_bias: Vec::new(),
            target_bias: Vec::new(),
            source_per_interval: (5, 15),
            target_per_interval: (1, 5),
            popularity_exponent: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let infeasible = |msg| Err(Error::Infeasible(msg));
        if self.n_users == 0 {
            return infeasible("synthetic config needs at least one user");
        }
        if self.n_source_items == 0 || self.n_target_items == 0 {
            return infeasible("synthetic config needs items on both networks");
        }
        if self.num_topics == 0 || self.num_intervals == 0 {
            return infeasible("synthetic config needs at least one topic and one interval");
        }
        if self.topics_per_user == 0 || self.topics_per_user > self.num_topics {
            return infeasible("topics_per_user must lie in [1, num_topics]");
        }
        if !(0.0..=1.0).contains(&self.rho) || !(0.0..=1.0).contains(&self.drift_magnitude) {
            return infeasible("rho and drift_magnitude must lie in [0, 1]");
        }
        for bias in [&self.source_bias, &self.target_bias] {
            if !bias.is_empty() && bias.len() != self.num_topics {
                return infeasible("bias vectors must have one weight per topic");
            }
            if bias.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return infeasible("bias weights must be finite and non-negative");
            }
        }
        if self.source_per_interval.0 > self.source_per_interval.1 || self.target_per_interval.0 > self.target_per_interval.1 {
            return infeasible("interaction ranges must satisfy min <= max");
        }
        if !self.popularity_exponent.is_finite() {
            return infeasible("popularity_exponent must be finite");
        }
        if let Some(d) = self.drift_interval {
            if d < 1 {
                return infeasible("drift_interval is 1-based");
            }
        }
        Ok(())
    }

    pub fn granularity(&self) -> Granularity {
        Granularity {
            kind: self.granularity,
            window_start: self.window_start,
        }
    }
}

/// The planted truth behind a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub users: Vec<String>,
    /// `[user][interval - 1][topic]`: distribution target interactions were drawn from.
    pub target_preferences: Vec<Vec<Vec<f64>>>,
    /// Same for the source network.
    pub source_preferences: Vec<Vec<Vec<f64>>>,
    pub drift_interval: Option<u32>,
    /// Topics with zero weight on the target network but not on the source.
    pub source_exclusive_topics: Vec<usize>,
    pub target_exclusive_topics: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: Dataset,
    pub truth: GroundTruth,
}

fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

fn item_id(network: NetworkId, j: usize) -> String {
    match network {
        NetworkId::Source => format!("s{j:05}"),
        NetworkId::Target => format!("v{j:05}"),
    }
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

fn categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// A distribution over `k` topics with mass on `count` distinct random topics
/// outside `avoid` when possible.
fn random_preference(k: usize, count: usize, avoid: &BTreeSet<usize>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut pool: Vec<usize> = (0..k).filter(|t| !avoid.contains(t)).collect();
    if pool.len() < count {
        pool = (0..k).collect();
    }
    let mut p = vec![0.0; k];
    for _ in 0..count {
        let pick = pool.swap_remove(below(rng, pool.len()));
        p[pick] = 0.5 + rng.gen::<f64>();
    }
    normalize(&mut p);
    p
}

fn normalize(p: &mut [f64]) {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
}

fn biased(p: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = if bias.is_empty() {
        p.to_vec()
    } else {
        p.iter().zip(bias).map(|(x, w)| x * w).collect()
    };
    normalize(&mut out);
    out
}

pub fn generate(config: &SynthConfig) -> Result<Generated> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let topics = config.num_topics;
    let granularity = config.granularity();

    let mut catalog = ItemCatalog::new(topics as u32);
    // items of topic `t` on a network, most popular first
    let mut by_topic: [Vec<Vec<usize>>; 2] = [vec![Vec::new(); topics], vec![Vec::new(); topics]];
    for (network, count) in [
        (NetworkId::Source, config.n_source_items),
        (NetworkId::Target, config.n_target_items),
    ] {
        for j in 0..count {
            let topic = j % topics;
            catalog.insert(network, item_id(network, j), topic as u32)?;
            by_topic[network as usize][topic].push(j);
        }
    }
    let popularity: Vec<f64> = (0..config.n_source_items.max(config.n_target_items) / topics + 1)
        .map(|r| 1.0 / libm::pow((r + 1) as f64, config.popularity_exponent))
        .collect();

    let mut bias = [config.source_bias.clone(), config.target_bias.clone()];
    for b in &mut bias {
        if b.is_empty() {
            *b = vec![1.0; topics];
        }
    }
    // topics a network cannot show; their mass is re-drawn elsewhere
    let usable = |network: NetworkId, topic: usize| bias[network as usize][topic] > 0.0 && !by_topic[network as usize][topic].is_empty();

    let t_count = config.num_intervals as usize;
    let mut interactions = Vec::new();
    let mut truth = GroundTruth {
        users: Vec::with_capacity(config.n_users),
        target_preferences: Vec::with_capacity(config.n_users),
        source_preferences: Vec::with_capacity(config.n_users),
        drift_interval: config.drift_interval,
        source_exclusive_topics: (0..topics)
            .filter(|&t| usable(NetworkId::Source, t) && !usable(NetworkId::Target, t))
            .collect(),
        target_exclusive_topics: (0..topics)
            .filter(|&t| usable(NetworkId::Target, t) && !usable(NetworkId::Source, t))
            .collect(),
    };

    for i in 0..config.n_users {
        let user = user_id(i);
        let base = random_preference(topics, config.topics_per_user, &BTreeSet::new(), &mut rng);
        let held: BTreeSet<usize> = (0..topics).filter(|&t| base[t] > 0.0).collect();
        let fresh = random_preference(topics, config.topics_per_user, &held, &mut rng);
        let own_source = random_preference(topics, config.topics_per_user, &BTreeSet::new(), &mut rng);
        let drifted: Vec<f64> = base
            .iter()
            .zip(&fresh)
            .map(|(b, f)| (1.0 - config.drift_magnitude) * b + config.drift_magnitude * f)
            .collect();

        let mut seen = BTreeSet::new();
        let mut target_prefs = Vec::with_capacity(t_count);
        let mut source_prefs = Vec::with_capacity(t_count);
        for interval in 1..=config.num_intervals {
            let latent = match config.drift_interval {
                Some(d) if interval >= d => &drifted,
                _ => &base,
            };
            let source_mix: Vec<f64> = latent
                .iter()
                .zip(&own_source)
                .map(|(l, o)| config.rho * l + (1.0 - config.rho) * o)
                .collect();
            let start = granularity.interval_start(interval)?;
            let end = granularity.interval_start(interval + 1)?;
            for (network, mix, range) in [
                (NetworkId::Target, latent.as_slice(), config.target_per_interval),
                (NetworkId::Source, source_mix.as_slice(), config.source_per_interval),
            ] {
                let mut p = biased(mix, &bias[network as usize]);
                for (t, x) in p.iter_mut().enumerate() {
                    if !usable(network, t) {
                        *x = 0.0;
                    }
                }
                normalize(&mut p);
                if network == NetworkId::Target {
                    target_prefs.push(p.clone());
                } else {
                    source_prefs.push(p.clone());
                }
                if p.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let n = rng.gen_range(range.0..=range.1);
                for _ in 0..n {
                    let topic = categorical(&p, &mut rng);
                    let pool = &by_topic[network as usize][topic];
                    let rank = categorical(&popularity[..pool.len()], &mut rng);
                    let item = pool[rank];
                    // resample timestamps that would duplicate a record
                    let ts = loop {
                        let ts = start + rng.gen_range(0..(end - start) as u64) as i64;
                        if seen.insert((network, item, ts)) {
                            break ts;
                        }
                    };
                    interactions.push(InteractionRecord::new(user.clone(), network, item_id(network, item), ts));
                }
            }
        }
        truth.users.push(user);
        truth.target_preferences.push(target_prefs);
        truth.source_preferences.push(source_prefs);
    }

    Ok(Generated {
        dataset: Dataset::new(interactions, catalog)?,
        truth,
    })
}
