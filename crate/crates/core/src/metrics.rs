//! Accuracy, diversity and novelty of a single recommendation list.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of the first `n` recommended items against the
/// user's test items. `None` when the user has no test items.
///
/// Precision divides by `n` even when fewer than `n` items were recommended.
pub fn f1_at_n(recommended: &[usize], test_items: &BTreeSet<usize>, n: usize) -> Option<Accuracy> {
    if test_items.is_empty() || n == 0 {
        return None;
    }
    let hits = recommended.iter().take(n).filter(|j| test_items.contains(j)).count() as f64;
    let precision = hits / n as f64;
    let recall = hits / test_items.len() as f64;
    // 2PR / (P + R) simplifies to 2·hits / (n + |test|), which rounds once
    let f1 = 2.0 * hits / (n + test_items.len()) as f64;
    Some(Accuracy { precision, recall, f1 })
}

/// Histogram intersection of two topic vectors over their combined mass.
/// Identical vectors score 0.5; two zero vectors score 0.
pub fn sim(a: &[f64], b: &[f64]) -> f64 {
    let shared: f64 = a.iter().zip(b).map(|(x, y)| x.min(*y)).sum();
    let total: f64 = a.iter().zip(b).map(|(x, y)| x + y).sum();
    if total > 0.0 {
        shared / total
    } else {
        0.0
    }
}

/// Mean of `1 - sim` over unordered pairs; `None` for fewer than two items.
pub fn diversity(topic_vectors: &[Vec<f64>]) -> Option<f64> {
    let s = topic_vectors.len();
    if s < 2 {
        return None;
    }
    let mut sum = 0.0;
    for a in 0..s {
        for b in a + 1..s {
            sum += 1.0 - sim(&topic_vectors[a], &topic_vectors[b]);
        }
    }
    Some(sum / (s * (s - 1) / 2) as f64)
}

/// One-hot topic vectors for hard-labelled items.
pub fn one_hot(topics: impl IntoIterator<Item = u32>, num_topics: usize) -> Vec<Vec<f64>> {
    topics
        .into_iter()
        .map(|t| {
            let mut v = vec![0.0; num_topics];
            v[t as usize] = 1.0;
            v
        })
        .collect()
}

/// Share of test items recovered minus share of training items repeated.
/// A term with an empty denominator counts as zero.
pub fn novelty(recommended: &[usize], test_items: &BTreeSet<usize>, train_items: &BTreeSet<usize>) -> f64 {
    let share = |set: &BTreeSet<usize>| {
        if set.is_empty() {
            0.0
        } else {
            recommended.iter().filter(|j| set.contains(j)).count() as f64 / set.len() as f64
        }
    };
    share(test_items) - share(train_items)
}
