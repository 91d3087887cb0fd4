//! Small random datasets and parameter sets for property and oracle tests.
//!
//! Unlike [`super::generate`], nothing here is planted: records are uniform
//! noise, sized so every target item and every user appears at least once.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::{assign_intervals, Dataset, Granularity, InteractionRecord, ItemCatalog, NetworkId};
use crate::model::{self, Hyperparams, ModelState, Observation, TrainingSet};
use crate::topics::TopicalProfiles;
use crate::Result;

/// Sizes of a random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub users: usize,
    pub items: usize,
    pub intervals: u32,
    pub topics: usize,
    /// Upper bound on records per user, network and interval.
    pub max_per_interval: u32,
}

const FORTNIGHT: i64 = 14 * 86_400;
pub const WINDOW_START: i64 = 1_425_168_000;

/// A dataset with biweekly intervals assigned and exactly `dims.intervals`
/// intervals, `dims.users` users and `dims.items` target items.
pub fn dataset(dims: Dims, rng: &mut impl Rng) -> Result<Dataset> {
    let mut catalog = ItemCatalog::new(dims.topics as u32);
    for network in [NetworkId::Source, NetworkId::Target] {
        for j in 0..dims.items {
            catalog.insert(network, item(network, j), rng.gen_range(0..dims.topics as u32))?;
        }
    }
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    let mut push = |user: usize, network, j: usize, interval: u32, rng: &mut dyn rand::RngCore| {
        let ts = WINDOW_START + (interval as i64 - 1) * FORTNIGHT + rng.gen_range(0..FORTNIGHT);
        if seen.insert((user, network, j, ts)) {
            records.push(InteractionRecord::new(format!("u{user:03}"), network, item(network, j), ts));
        }
    };
    for u in 0..dims.users {
        for interval in 1..=dims.intervals {
            for network in [NetworkId::Source, NetworkId::Target] {
                for _ in 0..rng.gen_range(0..=dims.max_per_interval) {
                    let j = rng.gen_range(0..dims.items);
                    push(u, network, j, interval, rng);
                }
            }
        }
    }
    // Anchor records so every user, item and the last interval exist.
    for j in 0..dims.items.max(dims.users) {
        let interval = rng.gen_range(1..=dims.intervals);
        push(j % dims.users, NetworkId::Target, j % dims.items, interval, rng);
    }
    push(0, NetworkId::Source, 0, dims.intervals, rng);
    assign_intervals(&Dataset::new(records, catalog)?, Granularity::biweekly(WINDOW_START))
}

fn item(network: NetworkId, j: usize) -> alloc::string::String {
    match network {
        NetworkId::Source => format!("s{j:03}"),
        NetworkId::Target => format!("v{j:03}"),
    }
}

/// A random dataset with matching profiles and a parameter draw of
/// half-width `scale`. Every other user is marked existing.
pub fn instance(dims: Dims, latent_dim: usize, scale: f64, rng: &mut impl Rng) -> Result<(Dataset, TopicalProfiles, ModelState)> {
    let ds = dataset(dims, rng)?;
    let profiles = TopicalProfiles::build(&ds)?;
    let hp = Hyperparams {
        latent_dim,
        num_topics: dims.topics,
        init_scale: scale,
        seed: rng.gen(),
        ..Hyperparams::default()
    };
    let existing: Vec<bool> = (0..ds.users().len()).map(|i| i % 2 == 0).collect();
    let state = model::init_model(&hp, &ds, &existing)?;
    Ok((ds, profiles, state))
}

/// `count` observations on random pairs with random targets in `[0, max_value)`.
pub fn observations(state: &ModelState, count: usize, max_value: f64, rng: &mut impl Rng) -> TrainingSet {
    TrainingSet {
        pairs: (0..count)
            .map(|_| Observation {
                user: rng.gen_range(0..state.num_users()),
                item: rng.gen_range(0..state.num_items()),
                value: rng.gen::<f64>() * max_value,
            })
            .collect(),
    }
}
