//! The time-aware cross-network transfer model.
//!
//! Each existing user `i` is represented by a per-interval aggregation vector
//! `t_i` (length `T`). The user's relative topical distributions on both
//! networks, `Sr_i` and `Tr_i` (`T × K^t`), are mapped into a `K`-dimensional
//! latent space by the transfer matrices `M_S` and `M_T`, and the target part
//! is scaled per interval by the fixed weights `D_i`. The predicted
//! preference for item `j` is
//!
//! ```text
//! t_i · (Sr_i · M_S + D_i · Tr_i · M_T) · v_j
//! ```
//!
//! New users have no target history; they use the mean of the existing users'
//! `t_i` and only the source term.
//!
//! All products are evaluated right-to-left through `K^t`-sized intermediates,
//! so one observation costs `O(T·K^t + K^t·K)` instead of forming the
//! `T × K` user matrix.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, NetworkId};
use crate::linalg::{dot, mat_vec, norm_sq, vec_mat, Matrix};
use crate::prefmatrix::PreferenceMatrix;
use crate::topics::TopicalProfiles;
use crate::{Error, Result};

/// How many zero-valued pairs join the positives of each training epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NegativeSampling {
    /// Per user, `round(ratio × positives)` distinct unobserved items.
    Ratio(f64),
    /// Every unobserved item of every trained user.
    All(AllMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllMarker {
    All,
}

impl NegativeSampling {
    pub const ALL: Self = NegativeSampling::All(AllMarker::All);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    /// Latent dimensionality `K`.
    pub latent_dim: usize,
    /// Topic count `K^t`.
    pub num_topics: usize,
    pub lambda: f64,
    /// Learning rate.
    pub mu: f64,
    /// Recency weight of the decayed preference matrix.
    pub beta: f64,
    /// Weight of the target-network contribution in `D_i`.
    pub gamma: f64,
    pub epochs: usize,
    pub negatives: NegativeSampling,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            latent_dim: 60,
            num_topics: 60,
            lambda: 0.5,
            mu: 0.001,
            beta: 0.8,
            gamma: 0.3,
            epochs: 100,
            negatives: NegativeSampling::Ratio(4.0),
            seed: 0,
            init_scale: 0.01,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.latent_dim == 0 {
            return bad("latent_dim", "must be at least 1");
        }
        if self.num_topics == 0 {
            return bad("num_topics", "must be at least 1");
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("init_scale", self.init_scale),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(name, "must be finite and non-negative");
            }
        }
        if let NegativeSampling::Ratio(r) = self.negatives {
            if !r.is_finite() || r < 0.0 {
                return bad("negatives", "ratio must be finite and non-negative");
            }
        }
        Ok(())
    }
}

/// Learned parameters plus the fixed per-user target weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    /// `N × T`; row `i` is `t_i`.
    pub time_vectors: Matrix,
    /// `M_S`, `K^t × K`.
    pub source_transfer: Matrix,
    /// `M_T`, `K^t × K`.
    pub target_transfer: Matrix,
    /// `M × K`; row `j` is the item vector `v_j`.
    pub item_factors: Matrix,
    /// `N × T`; row `i` is the diagonal of `D_i`.
    pub target_weights: Matrix,
    /// Whether user `i` belongs to the existing group.
    pub existing: Vec<bool>,
    pub trained_intervals: u32,
}

impl ModelState {
    pub fn num_users(&self) -> usize {
        self.time_vectors.rows()
    }

    pub fn num_items(&self) -> usize {
        self.item_factors.rows()
    }

    pub fn num_intervals(&self) -> usize {
        self.time_vectors.cols()
    }

    pub fn num_topics(&self) -> usize {
        self.source_transfer.rows()
    }

    pub fn latent_dim(&self) -> usize {
        self.source_transfer.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.time_vectors.is_finite()
            && self.source_transfer.is_finite()
            && self.target_transfer.is_finite()
            && self.item_factors.is_finite()
    }

    fn check_user(&self, user: usize) -> Result<()> {
        if user >= self.num_users() {
            return Err(Error::UnknownUser(format!("#{user}")));
        }
        Ok(())
    }

    fn check_item(&self, item: usize) -> Result<()> {
        if item >= self.num_items() {
            return Err(Error::UnknownTargetItem(format!("#{item}")));
        }
        Ok(())
    }

    /// Checks that `profiles` describe the same users, intervals and topics.
    pub fn check_profiles(&self, profiles: &TopicalProfiles) -> Result<()> {
        for (what, expected, found) in [
            ("profile users", self.num_users(), profiles.num_users()),
            ("profile intervals", self.num_intervals(), profiles.num_intervals()),
            ("profile topics", self.num_topics(), profiles.num_topics()),
        ] {
            if expected != found {
                return Err(Error::DimensionMismatch { what, expected, found });
            }
        }
        Ok(())
    }
}

/// `D_i` for one user: `gamma · |target at t̂| / max(1, |source at t̂|)`.
/// Hidden records are not counted.
pub fn compute_target_weights(train: &Dataset, user: &str, gamma: f64) -> Result<Vec<f64>> {
    let idx = train.user_index(user).ok_or_else(|| Error::UnknownUser(user.into()))?;
    Ok(all_target_weights(train, gamma)?.row(idx).to_vec())
}

/// `D` for every user, one row per user in dataset order.
pub fn all_target_weights(train: &Dataset, gamma: f64) -> Result<Matrix> {
    train.require_intervals()?;
    let intervals = train.num_intervals() as usize;
    let num_users = train.users().len();
    let mut source = Matrix::zeros(num_users, intervals);
    let mut target = Matrix::zeros(num_users, intervals);
    for r in train.interactions() {
        if r.hidden || r.interval as usize > intervals {
            continue;
        }
        let Some(i) = train.user_index(&r.user) else { continue };
        let counts = match r.network {
            NetworkId::Source => &mut source,
            NetworkId::Target => &mut target,
        };
        counts[(i, r.interval as usize - 1)] += 1.0;
    }
    Ok(Matrix::from_fn(num_users, intervals, |i, s| {
        gamma * target[(i, s)] / source[(i, s)].max(1.0)
    }))
}

fn uniform_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| (2.0 * rng.gen::<f64>() - 1.0) * scale)
}

/// Draws `t`, `M_S`, `M_T` and `V` (in that order) uniformly from
/// `[-init_scale, init_scale]` and computes `D` from the training data.
pub fn init_model(hp: &Hyperparams, train: &Dataset, existing: &[bool]) -> Result<ModelState> {
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    init_with_rng(hp, train, existing, &mut rng)
}

fn init_with_rng(hp: &Hyperparams, train: &Dataset, existing: &[bool], rng: &mut ChaCha8Rng) -> Result<ModelState> {
    hp.validate()?;
    train.require_intervals()?;
    if hp.num_topics != train.num_topics() {
        return Err(Error::DimensionMismatch {
            what: "topic count",
            expected: train.num_topics(),
            found: hp.num_topics,
        });
    }
    let num_users = train.users().len();
    if existing.len() != num_users {
        return Err(Error::DimensionMismatch {
            what: "existing-user mask",
            expected: num_users,
            found: existing.len(),
        });
    }
    let intervals = train.num_intervals() as usize;
    let scale = hp.init_scale;
    Ok(ModelState {
        time_vectors: uniform_matrix(num_users, intervals, scale, rng),
        source_transfer: uniform_matrix(hp.num_topics, hp.latent_dim, scale, rng),
        target_transfer: uniform_matrix(hp.num_topics, hp.latent_dim, scale, rng),
        item_factors: uniform_matrix(train.items().len(), hp.latent_dim, scale, rng),
        target_weights: all_target_weights(train, hp.gamma)?,
        existing: existing.to_vec(),
        trained_intervals: train.num_intervals(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

/// The observations of one epoch: every nonzero of the preference matrix plus
/// sampled zero-valued pairs, without duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub pairs: Vec<Observation>,
}

impl TrainingSet {
    pub fn positives(matrix: &PreferenceMatrix) -> Self {
        let pairs = matrix
            .triplets()
            .map(|(user, item, value)| Observation { user, item, value })
            .collect();
        Self { pairs }
    }

    /// Positives plus negatives drawn from `rng`, in shuffled order. Only
    /// users with at least one positive receive negatives.
    pub fn sample(matrix: &PreferenceMatrix, negatives: NegativeSampling, rng: &mut impl Rng) -> Self {
        let mut set = Self::positives(matrix);
        let num_items = matrix.num_cols();
        let mut candidates = Vec::with_capacity(num_items);
        for i in 0..matrix.num_rows() {
            let row = matrix.row(i);
            if row.is_empty() {
                continue;
            }
            let free = num_items - row.len();
            let wanted = match negatives {
                NegativeSampling::All(_) => free,
                NegativeSampling::Ratio(r) => (libm::round(r * row.len() as f64) as usize).min(free),
            };
            if wanted == 0 {
                continue;
            }
            candidates.clear();
            let mut observed = row.iter().map(|&(j, _)| j).peekable();
            for j in 0..num_items {
                if observed.peek() == Some(&j) {
                    observed.next();
                } else {
                    candidates.push(j);
                }
            }
            let (chosen, _) = candidates.partial_shuffle(rng, wanted);
            set.pairs
                .extend(chosen.iter().map(|&item| Observation { user: i, item, value: 0.0 }));
        }
        set.pairs.shuffle(rng);
        set
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Intermediates of one prediction, reused across observations.
struct Scratch {
    /// `t_i · Sr_i`, length `K^t`.
    src_mix: Vec<f64>,
    /// `t_i · D_i · Tr_i`, length `K^t`.
    tgt_mix: Vec<f64>,
    /// `src_mix · M_S + tgt_mix · M_T`, length `K`.
    user_vec: Vec<f64>,
    tmp_k: Vec<f64>,
    /// `M_S · v_j` and `M_T · v_j`, length `K^t`.
    src_item: Vec<f64>,
    tgt_item: Vec<f64>,
    /// `∂prediction / ∂t_i`, length `T`.
    time_grad: Vec<f64>,
}

impl Scratch {
    fn new(state: &ModelState) -> Self {
        let topics = state.num_topics();
        let latent = state.latent_dim();
        Self {
            src_mix: vec![0.0; topics],
            tgt_mix: vec![0.0; topics],
            user_vec: vec![0.0; latent],
            tmp_k: vec![0.0; latent],
            src_item: vec![0.0; topics],
            tgt_item: vec![0.0; topics],
            time_grad: vec![0.0; state.num_intervals()],
        }
    }
}

/// Fills `src_mix`, `tgt_mix` and `user_vec` for one user and time vector.
fn mix_user(state: &ModelState, profiles: &TopicalProfiles, user: usize, time_vector: &[f64], with_target: bool, scratch: &mut Scratch) {
    let source_rel = &profiles.source.relative[user];
    vec_mat(time_vector, source_rel, &mut scratch.src_mix);
    vec_mat(&scratch.src_mix, &state.source_transfer, &mut scratch.user_vec);
    if with_target {
        let target_rel = &profiles.target.relative[user];
        let weights = state.target_weights.row(user);
        scratch.tgt_mix.iter_mut().for_each(|x| *x = 0.0);
        for (tau, (&tw, &dw)) in time_vector.iter().zip(weights).enumerate() {
            let weight = tw * dw;
            if weight == 0.0 {
                continue;
            }
            for (acc, &x) in scratch.tgt_mix.iter_mut().zip(target_rel.row(tau)) {
                *acc += weight * x;
            }
        }
        vec_mat(&scratch.tgt_mix, &state.target_transfer, &mut scratch.tmp_k);
        for (acc_k, x) in scratch.user_vec.iter_mut().zip(&scratch.tmp_k) {
            *acc_k += x;
        }
    } else {
        scratch.tgt_mix.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Latent vector `t_i (Sr_i M_S + D_i Tr_i M_T)` of an existing user.
pub fn user_vector(state: &ModelState, profiles: &TopicalProfiles, user: usize) -> Result<Vec<f64>> {
    state.check_user(user)?;
    state.check_profiles(profiles)?;
    let mut scratch = Scratch::new(state);
    mix_user(state, profiles, user, state.time_vectors.row(user), true, &mut scratch);
    Ok(scratch.user_vec)
}

/// `t_i · (Sr_i · M_S + D_i · Tr_i · M_T) · v_j`.
pub fn predict_one(state: &ModelState, profiles: &TopicalProfiles, user: usize, item: usize) -> Result<f64> {
    state.check_item(item)?;
    let user_vec = user_vector(state, profiles, user)?;
    Ok(dot(&user_vec, state.item_factors.row(item)))
}

/// Scores of every item for an existing user.
pub fn predict_existing(state: &ModelState, profiles: &TopicalProfiles, user: usize) -> Result<Vec<f64>> {
    if !state.existing.get(user).copied().unwrap_or(false) {
        state.check_user(user)?;
        return Err(Error::NotAnExistingUser(format!("#{user}")));
    }
    let user_vec = user_vector(state, profiles, user)?;
    Ok(score_items(state, &user_vec))
}

fn score_items(state: &ModelState, user_vec: &[f64]) -> Vec<f64> {
    (0..state.num_items()).map(|j| dot(user_vec, state.item_factors.row(j))).collect()
}

/// Mean of the existing users' time vectors.
pub fn new_user_vector(state: &ModelState) -> Result<Vec<f64>> {
    let mut mean = vec![0.0; state.num_intervals()];
    let mut count = 0usize;
    for (i, _) in state.existing.iter().enumerate().filter(|(_, &e)| e) {
        for (m, x) in mean.iter_mut().zip(state.time_vectors.row(i)) {
            *m += x;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoExistingUsers);
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    Ok(mean)
}

/// `t_new · Sr_i · M_S · V` for a user without target history.
pub fn predict_new(state: &ModelState, profiles: &TopicalProfiles, user: usize) -> Result<Vec<f64>> {
    state.check_user(user)?;
    state.check_profiles(profiles)?;
    let mean_time_vector = new_user_vector(state)?;
    Ok(predict_with_time_vector(state, profiles, user, &mean_time_vector, false))
}

/// Scores for `user` with an explicit time vector; `with_target` toggles the
/// `D_i · Tr_i · M_T` term.
pub fn predict_with_time_vector(
    state: &ModelState,
    profiles: &TopicalProfiles,
    user: usize,
    time_vector: &[f64],
    with_target: bool,
) -> Vec<f64> {
    let mut scratch = Scratch::new(state);
    mix_user(state, profiles, user, time_vector, with_target, &mut scratch);
    score_items(state, &scratch.user_vec)
}

/// Scores for either group, dispatching on the stored partition.
pub fn predict_user(state: &ModelState, profiles: &TopicalProfiles, user: usize) -> Result<Vec<f64>> {
    state.check_user(user)?;
    if state.existing[user] {
        predict_existing(state, profiles, user)
    } else {
        predict_new(state, profiles, user)
    }
}

/// Computes the residual of `obs` and the partial derivatives of the
/// prediction w.r.t. `t_i` (`time_grad`), `M_S` (`src_mix ⊗ v_j`),
/// `M_T` (`tgt_mix ⊗ v_j`) and `v_j` (`user_vec`).
fn residual(state: &ModelState, profiles: &TopicalProfiles, obs: &Observation, scratch: &mut Scratch) -> f64 {
    let user = obs.user;
    let item_vec = state.item_factors.row(obs.item);
    mix_user(state, profiles, user, state.time_vectors.row(user), true, scratch);
    let prediction = dot(&scratch.user_vec, item_vec);

    mat_vec(&state.source_transfer, item_vec, &mut scratch.src_item);
    mat_vec(&state.target_transfer, item_vec, &mut scratch.tgt_item);
    let source_rel = &profiles.source.relative[user];
    let target_rel = &profiles.target.relative[user];
    let weights = state.target_weights.row(user);
    for (tau, slot) in scratch.time_grad.iter_mut().enumerate() {
        *slot = dot(source_rel.row(tau), &scratch.src_item) + weights[tau] * dot(target_rel.row(tau), &scratch.tgt_item);
    }
    obs.value - prediction
}

/// Per-observation regularized squared error summed over `set`; the shared
/// transfer matrices are regularized once per observation.
pub fn loss(state: &ModelState, profiles: &TopicalProfiles, set: &TrainingSet, lambda: f64) -> Result<f64> {
    state.check_profiles(profiles)?;
    let shared = state.source_transfer.norm_sq() + state.target_transfer.norm_sq();
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; state.num_users()];
    let mut total = 0.0;
    for obs in &set.pairs {
        state.check_user(obs.user)?;
        state.check_item(obs.item)?;
        let user_vec = match &cache[obs.user] {
            Some(user_vec) => user_vec,
            None => cache[obs.user].insert(user_vector(state, profiles, obs.user)?),
        };
        let item_vec = state.item_factors.row(obs.item);
        let err = obs.value - dot(user_vec, item_vec);
        total += err * err + lambda * (norm_sq(state.time_vectors.row(obs.user)) + shared + norm_sq(item_vec));
    }
    Ok(total)
}

/// Gradient of [`loss`] with respect to every parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub time_vectors: Matrix,
    pub source_transfer: Matrix,
    pub target_transfer: Matrix,
    pub item_factors: Matrix,
}

/// Sum over observations of `-2 e ∂p/∂θ + 2 λ θ`, the same per-observation
/// terms the SGD step applies.
pub fn loss_gradient(state: &ModelState, profiles: &TopicalProfiles, set: &TrainingSet, lambda: f64) -> Result<Gradient> {
    state.check_profiles(profiles)?;
    let mut grads = Gradient {
        time_vectors: Matrix::zeros(state.num_users(), state.num_intervals()),
        source_transfer: Matrix::zeros(state.num_topics(), state.latent_dim()),
        target_transfer: Matrix::zeros(state.num_topics(), state.latent_dim()),
        item_factors: Matrix::zeros(state.num_items(), state.latent_dim()),
    };
    let mut scratch = Scratch::new(state);
    for obs in &set.pairs {
        state.check_user(obs.user)?;
        state.check_item(obs.item)?;
        let err = residual(state, profiles, obs, &mut scratch);
        let time_vec = state.time_vectors.row(obs.user);
        for ((acc, &dp), &x) in grads
            .time_vectors
            .row_mut(obs.user)
            .iter_mut()
            .zip(&scratch.time_grad)
            .zip(time_vec)
        {
            *acc += -2.0 * err * dp + 2.0 * lambda * x;
        }
        let item_vec = state.item_factors.row(obs.item);
        for (grad, param, mix) in [
            (&mut grads.source_transfer, &state.source_transfer, &scratch.src_mix),
            (&mut grads.target_transfer, &state.target_transfer, &scratch.tgt_mix),
        ] {
            for (k, &mk) in mix.iter().enumerate() {
                for ((acc, &vc), &w) in grad.row_mut(k).iter_mut().zip(item_vec).zip(param.row(k)) {
                    *acc += -2.0 * err * mk * vc + 2.0 * lambda * w;
                }
            }
        }
        for ((acc, &uc), &x) in grads.item_factors.row_mut(obs.item).iter_mut().zip(&scratch.user_vec).zip(item_vec) {
            *acc += -2.0 * err * uc + 2.0 * lambda * x;
        }
    }
    Ok(grads)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainOptions {
    /// Keep every `t_i` fixed; the time-vector update is skipped.
    pub freeze_time_vectors: bool,
}

/// One pass over `set` in its given order, then the loss on `set`.
///
/// For every observation the residual and all partial derivatives are taken
/// from the parameters before any of the four updates, which then run in the
/// order `t_i`, `M_S`, `M_T`, `v_j`.
pub fn sgd_epoch(
    state: &mut ModelState,
    profiles: &TopicalProfiles,
    set: &TrainingSet,
    hp: &Hyperparams,
    options: TrainOptions,
    epoch: usize,
) -> Result<f64> {
    state.check_profiles(profiles)?;
    let mut scratch = Scratch::new(state);
    let step = 2.0 * hp.mu;
    let shrink = 1.0 - step * hp.lambda;
    for (index, obs) in set.pairs.iter().enumerate() {
        state.check_user(obs.user)?;
        state.check_item(obs.item)?;
        let err = residual(state, profiles, obs, &mut scratch);
        let mut finite = err.is_finite();

        if !options.freeze_time_vectors {
            for (x, &dp) in state.time_vectors.row_mut(obs.user).iter_mut().zip(&scratch.time_grad) {
                *x = shrink * *x + step * err * dp;
                finite &= x.is_finite();
            }
        }
        let item_vec = state.item_factors.row(obs.item);
        for (param, mix) in [
            (&mut state.source_transfer, &scratch.src_mix),
            (&mut state.target_transfer, &scratch.tgt_mix),
        ] {
            for (k, &mk) in mix.iter().enumerate() {
                let c = step * err * mk;
                for (w, &vc) in param.row_mut(k).iter_mut().zip(item_vec) {
                    *w = shrink * *w + c * vc;
                    finite &= w.is_finite();
                }
            }
        }
        for (x, &uc) in state.item_factors.row_mut(obs.item).iter_mut().zip(&scratch.user_vec) {
            *x = shrink * *x + step * err * uc;
            finite &= x.is_finite();
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
    let epoch_loss = loss(state, profiles, set, hp.lambda)?;
    if !epoch_loss.is_finite() {
        return Err(Error::Divergence {
            epoch,
            observation: set.len(),
            user: 0,
            item: 0,
        });
    }
    Ok(epoch_loss)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub state: ModelState,
    /// Loss after each epoch.
    pub losses: Vec<f64>,
}

/// Initializes from `hp.seed` and runs `hp.epochs` SGD epochs against
/// `matrix`. Each epoch resamples negatives and reshuffles from the same
/// generator, so the result is fully determined by the inputs.
pub fn train(
    train: &Dataset,
    profiles: &TopicalProfiles,
    matrix: &PreferenceMatrix,
    existing: &[bool],
    hp: &Hyperparams,
    options: TrainOptions,
) -> Result<TrainedModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut state = init_with_rng(hp, train, existing, &mut rng)?;
    if options.freeze_time_vectors {
        state.time_vectors.fill(1.0);
    }
    state.check_profiles(profiles)?;
    if matrix.num_rows() != state.num_users() || matrix.num_cols() != state.num_items() {
        return Err(Error::DimensionMismatch {
            what: "preference matrix",
            expected: state.num_users() * state.num_items(),
            found: matrix.num_rows() * matrix.num_cols(),
        });
    }
    let mut losses = Vec::with_capacity(hp.epochs);
    for epoch in 0..hp.epochs {
        let set = TrainingSet::sample(matrix, hp.negatives, &mut rng);
        losses.push(sgd_epoch(&mut state, profiles, &set, hp, options, epoch)?);
    }
    Ok(TrainedModel { state, losses })
}

/// Indices of `true` entries in a group mask.
pub fn group_mask(users: &[alloc::string::String], members: &BTreeSet<alloc::string::String>) -> Vec<bool> {
    users.iter().map(|u| members.contains(u)).collect()
}

/// A Top-N list of item indices with their scores.
///
/// Items are ordered by descending score, ties by ascending index. Item
/// indices follow the lexicographic item ordering, so index order is also
/// item-id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<(usize, f64)>,
    /// Fewer than the requested number of items were available.
    pub truncated: bool,
}

impl Ranking {
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `n` entries as a new ranking.
    pub fn prefix(&self, n: usize) -> Ranking {
        Ranking {
            entries: self.entries[..n.min(self.entries.len())].to_vec(),
            truncated: self.truncated || n > self.entries.len(),
        }
    }
}

/// The `n` best non-excluded items.
pub fn top_n(scores: &[f64], n: usize, exclude: &BTreeSet<usize>) -> Result<Ranking> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be at least 1",
        });
    }
    let mut candidates: Vec<(usize, f64)> = scores.iter().copied().enumerate().filter(|(j, _)| !exclude.contains(j)).collect();
    let by_rank = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    let truncated = candidates.len() < n;
    if !truncated && candidates.len() > n {
        candidates.select_nth_unstable_by(n - 1, by_rank);
        candidates.truncate(n);
    }
    candidates.sort_by(by_rank);
    Ok(Ranking {
        entries: candidates,
        truncated,
    })
}
