//! Time-aware cross-network recommendation.
//!
//! Users interact with items on two networks: a *source* network whose
//! activity is only used to enrich user profiles, and a *target* network
//! whose items are recommended. Every item carries a hard topic label, so
//! both networks can be compared in a shared topical space.
//!
//! The crate is split along the pipeline:
//!
//! - [`corpus`]: interaction records, interval assignment, activity
//!   filtering, temporal train/test splits and the new/existing user split.
//! - [`topics`]: absolute, normalized and relative topical distributions,
//!   plus overlap, drift and network-bias analyses.
//! - [`prefmatrix`]: the recency-decayed user-item preference matrix and
//!   its plain binary counterpart.
//! - [`model`]: the time-aware transfer model trained by SGD, with
//!   prediction for existing and new users and Top-N ranking.
//! - [`baselines`]: TimePop, time-biased KNN, TimeMF and ACNRS.
//! - [`metrics`] and [`eval`]: F1@N, diversity, novelty and the
//!   experiment grid runner.
//! - [`synth`]: a seeded synthetic benchmark generator and naive oracles.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! model persistence live in the `crossrec` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod corpus;
mod error;
pub mod eval;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod prefmatrix;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};
