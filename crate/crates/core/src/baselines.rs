//! Comparison recommenders: TimePop, time-biased KNN, TimeMF and ACNRS.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, NetworkId};
use crate::linalg::{dot, norm_sq, Matrix};
use crate::model::{self, Hyperparams, NegativeSampling, Ranking, TrainOptions, TrainedModel, TrainingSet};
use crate::prefmatrix::PreferenceMatrix;
use crate::topics::TopicalProfiles;
use crate::{Error, Result};

/// The `n` target items with the most interactions in the last training
/// interval. An empty interval falls back to the one before it.
pub fn time_pop(train: &Dataset, n: usize) -> Result<Ranking> {
    train.require_intervals()?;
    let mut counts = vec![0.0; train.items().len()];
    for interval in (1..=train.num_intervals()).rev() {
        let mut any = false;
        for r in train.interactions() {
            if r.network == NetworkId::Target && !r.hidden && r.interval == interval {
                if let Some(j) = train.item_index(&r.item) {
                    counts[j] += 1.0;
                    any = true;
                }
            }
        }
        if any {
            return model::top_n(&counts, n, &BTreeSet::new());
        }
    }
    Err(Error::NoPopularItems)
}

/// User-based KNN over rows of the decayed preference matrix.
///
/// Neighbours are the `k` most cosine-similar users with a non-zero row.
/// An item's score is the similarity-weighted sum of the neighbours'
/// decayed preferences for it, so recent neighbour activity dominates.
#[derive(Debug, Clone)]
pub struct Tbknn<'a> {
    matrix: &'a PreferenceMatrix,
    norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnScores {
    pub scores: Vec<f64>,
    pub neighbors: Vec<(usize, f64)>,
    /// Fewer than `k` users were eligible as neighbours.
    pub short: bool,
}

impl<'a> Tbknn<'a> {
    pub fn new(matrix: &'a PreferenceMatrix) -> Self {
        let norms = (0..matrix.num_rows())
            .map(|i| libm::sqrt(matrix.row(i).iter().map(|&(_, v)| v * v).sum()))
            .collect();
        Self { matrix, norms }
    }

    /// Cosine similarity of two rows; zero when either row is empty.
    pub fn similarity(&self, a: usize, b: usize) -> f64 {
        if self.norms[a] == 0.0 || self.norms[b] == 0.0 {
            return 0.0;
        }
        let (ra, rb) = (self.matrix.row(a), self.matrix.row(b));
        let (mut x, mut y, mut acc) = (0, 0, 0.0);
        while x < ra.len() && y < rb.len() {
            match ra[x].0.cmp(&rb[y].0) {
                core::cmp::Ordering::Less => x += 1,
                core::cmp::Ordering::Greater => y += 1,
                core::cmp::Ordering::Equal => {
                    acc += ra[x].1 * rb[y].1;
                    x += 1;
                    y += 1;
                }
            }
        }
        acc / (self.norms[a] * self.norms[b])
    }

    /// Up to `k` neighbours, by descending similarity then ascending index.
    pub fn neighbors(&self, user: usize, k: usize) -> (Vec<(usize, f64)>, bool) {
        let mut all: Vec<(usize, f64)> = (0..self.matrix.num_rows())
            .filter(|&u| u != user && self.norms[u] > 0.0)
            .map(|u| (u, self.similarity(user, u)))
            .collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let short = all.len() < k;
        all.truncate(k);
        (all, short)
    }

    pub fn scores(&self, user: usize, k: usize) -> Result<KnnScores> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be at least 1",
            });
        }
        if user >= self.matrix.num_rows() {
            return Err(Error::UnknownUser(format!("#{user}")));
        }
        if self.norms[user] == 0.0 {
            return Err(Error::NotAnExistingUser(format!("#{user}")));
        }
        let (neighbors, short) = self.neighbors(user, k);
        let mut scores = vec![0.0; self.matrix.num_cols()];
        for &(u, sim) in &neighbors {
            for &(j, v) in self.matrix.row(u) {
                scores[j] += sim * v;
            }
        }
        Ok(KnnScores { scores, neighbors, short })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeMfConfig {
    pub latent_dim: usize,
    pub lambda: f64,
    pub mu: f64,
    pub epochs: usize,
    pub negatives: NegativeSampling,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for TimeMfConfig {
    fn default() -> Self {
        let hp = Hyperparams::default();
        Self {
            latent_dim: hp.latent_dim,
            lambda: hp.lambda,
            mu: hp.mu,
            epochs: hp.epochs,
            negatives: hp.negatives,
            seed: hp.seed,
            init_scale: hp.init_scale,
        }
    }
}

impl TimeMfConfig {
    /// Shares every setting the two models have in common.
    pub fn from_hyperparams(hp: &Hyperparams) -> Self {
        Self {
            latent_dim: hp.latent_dim,
            lambda: hp.lambda,
            mu: hp.mu,
            epochs: hp.epochs,
            negatives: hp.negatives,
            seed: hp.seed,
            init_scale: hp.init_scale,
        }
    }
}

/// Plain matrix factorization factors: row `i` of `users` is `u_i`, row `j`
/// of `items` is `v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfModel {
    pub users: Matrix,
    pub items: Matrix,
    pub losses: Vec<f64>,
}

impl MfModel {
    pub fn predict(&self, user: usize, item: usize) -> f64 {
        dot(self.users.row(user), self.items.row(item))
    }

    pub fn scores(&self, user: usize) -> Result<Vec<f64>> {
        if user >= self.users.rows() {
            return Err(Error::UnknownUser(format!("#{user}")));
        }
        Ok((0..self.items.rows()).map(|j| self.predict(user, j)).collect())
    }

    /// `Σ (r - u_i·v_j)² + λ(‖u_i‖² + ‖v_j‖²)` over the observations.
    pub fn loss(&self, set: &TrainingSet, lambda: f64) -> f64 {
        set.pairs
            .iter()
            .map(|obs| {
                let (user_vec, item_vec) = (self.users.row(obs.user), self.items.row(obs.item));
                let err = obs.value - dot(user_vec, item_vec);
                err * err + lambda * (norm_sq(user_vec) + norm_sq(item_vec))
            })
            .sum()
    }

    /// Gradient of [`MfModel::loss`]: `(∂/∂U, ∂/∂V)`.
    pub fn loss_gradient(&self, set: &TrainingSet, lambda: f64) -> (Matrix, Matrix) {
        let mut grad_users = Matrix::zeros(self.users.rows(), self.users.cols());
        let mut grad_items = Matrix::zeros(self.items.rows(), self.items.cols());
        for obs in &set.pairs {
            let (user_vec, item_vec) = (self.users.row(obs.user), self.items.row(obs.item));
            let err = obs.value - dot(user_vec, item_vec);
            for ((acc, &vc), &uc) in grad_users.row_mut(obs.user).iter_mut().zip(item_vec).zip(user_vec) {
                *acc += -2.0 * err * vc + 2.0 * lambda * uc;
            }
            for ((acc, &uc), &vc) in grad_items.row_mut(obs.item).iter_mut().zip(user_vec).zip(item_vec) {
                *acc += -2.0 * err * uc + 2.0 * lambda * vc;
            }
        }
        (grad_users, grad_items)
    }

    /// One SGD pass; both vectors move from their pre-update values.
    pub fn sgd_epoch(&mut self, set: &TrainingSet, config: &TimeMfConfig, epoch: usize) -> Result<f64> {
        let step = 2.0 * config.mu;
        let shrink = 1.0 - step * config.lambda;
        let latent = self.users.cols();
        let mut old_user_vec = vec![0.0; latent];
        for (index, obs) in set.pairs.iter().enumerate() {
            old_user_vec.copy_from_slice(self.users.row(obs.user));
            let err = obs.value - dot(&old_user_vec, self.items.row(obs.item));
            let mut finite = err.is_finite();
            for (uc, &vc) in self.users.row_mut(obs.user).iter_mut().zip(self.items.row(obs.item)) {
                *uc = shrink * *uc + step * err * vc;
                finite &= uc.is_finite();
            }
            for (vc, &uc) in self.items.row_mut(obs.item).iter_mut().zip(&old_user_vec) {
                *vc = shrink * *vc + step * err * uc;
                finite &= vc.is_finite();
            }
            if !finite {
                return Err(Error::Divergence {
                    epoch,
                    observation: index,
                    user: obs.user,
                    item: obs.item,
                });
            }
        }
        Ok(self.loss(set, config.lambda))
    }
}

/// Matrix factorization fitted to the decayed matrix instead of a binary one.
pub fn time_mf(matrix: &PreferenceMatrix, config: &TimeMfConfig) -> Result<MfModel> {
    if config.latent_dim == 0 {
        return Err(Error::InvalidParameter {
            name: "latent_dim",
            reason: "must be at least 1",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = config.init_scale;
    let mut uniform = |rows, cols| Matrix::from_fn(rows, cols, |_, _| (2.0 * rng.gen::<f64>() - 1.0) * scale);
    let users = uniform(matrix.num_rows(), config.latent_dim);
    let items = uniform(matrix.num_cols(), config.latent_dim);
    let mut mf = MfModel {
        users,
        items,
        losses: Vec::with_capacity(config.epochs),
    };
    for epoch in 0..config.epochs {
        let set = TrainingSet::sample(matrix, config.negatives, &mut rng);
        let epoch_loss = mf.sgd_epoch(&set, config, epoch)?;
        mf.losses.push(epoch_loss);
    }
    Ok(mf)
}

/// The transfer model with every `t_i` pinned to ones, trained on the binary
/// matrix. Prediction goes through the same functions as the full model.
pub fn acnrs(
    train: &Dataset,
    profiles: &TopicalProfiles,
    binary: &PreferenceMatrix,
    existing: &[bool],
    hp: &Hyperparams,
) -> Result<TrainedModel> {
    model::train(train, profiles, binary, existing, hp, TrainOptions { freeze_time_vectors: true })
}
