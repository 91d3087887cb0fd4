//! Brute-force reference implementations used to cross-check the production
//! code paths. Inputs are plain nested vectors and nothing here calls into
//! `model`, `prefmatrix` or `linalg`.

// Index loops mirror the summation formulas term by term on purpose.
#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Dataset, NetworkId};

/// Raw parameters for one user/item prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    /// One weight per interval.
    pub time_vector: Vec<f64>,
    /// Intervals × topics.
    pub source_relative: Vec<Vec<f64>>,
    /// Intervals × topics.
    pub target_relative: Vec<Vec<f64>>,
    /// One weight per interval.
    pub target_weights: Vec<f64>,
    /// Topics × latent dimensions.
    pub source_transfer: Vec<Vec<f64>>,
    /// Topics × latent dimensions.
    pub target_transfer: Vec<Vec<f64>>,
    /// One weight per latent dimension.
    pub item_factors: Vec<f64>,
}

/// Forms the full intervals × latent user matrix first, then contracts it
/// with the time vector and the item factors.
pub fn predict_existing(p: &RawParams) -> f64 {
    let intervals = p.time_vector.len();
    let topics = p.source_transfer.len();
    let latent = p.item_factors.len();
    let mut user_matrix = vec![vec![0.0; latent]; intervals];
    for tau in 0..intervals {
        for c in 0..latent {
            let mut src = 0.0;
            let mut tgt = 0.0;
            for topic in 0..topics {
                src += p.source_relative[tau][topic] * p.source_transfer[topic][c];
                tgt += p.target_relative[tau][topic] * p.target_transfer[topic][c];
            }
            user_matrix[tau][c] = src + p.target_weights[tau] * tgt;
        }
    }
    let mut out = 0.0;
    for tau in 0..intervals {
        for c in 0..latent {
            out += p.time_vector[tau] * user_matrix[tau][c] * p.item_factors[c];
        }
    }
    out
}

/// Source term only; target profiles, target transfer and weights are ignored.
pub fn predict_new(p: &RawParams) -> f64 {
    let mut out = 0.0;
    for tau in 0..p.time_vector.len() {
        for topic in 0..p.source_transfer.len() {
            for c in 0..p.item_factors.len() {
                out += p.time_vector[tau] * p.source_relative[tau][topic] * p.source_transfer[topic][c] * p.item_factors[c];
            }
        }
    }
    out
}

/// Componentwise mean of equal-length vectors.
pub fn mean_vector(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = vectors.len() as f64;
    out.iter().map(|x| x / n).collect()
}

/// One entry of the decayed preference matrix by scanning the whole log.
pub fn decayed_entry(dataset: &Dataset, user: &str, item: &str, beta: f64, as_of: u32) -> f64 {
    let mut sum = 0.0;
    for r in dataset.interactions() {
        if r.user == user && r.item == item && r.network == NetworkId::Target && !r.hidden && r.interval <= as_of {
            sum += libm::exp(beta * r.interval as f64);
        }
    }
    sum
}

/// Interaction count of `user` on `network` in `interval` with topic `topic`,
/// by scanning the whole log.
pub fn absolute_count(dataset: &Dataset, user: &str, network: NetworkId, interval: u32, topic: u32) -> f64 {
    dataset
        .interactions()
        .iter()
        .filter(|r| r.user == user && r.network == network && r.interval == interval && !r.hidden)
        .filter(|r| dataset.catalog().topic(r.network, &r.item) == Some(topic))
        .count() as f64
}
