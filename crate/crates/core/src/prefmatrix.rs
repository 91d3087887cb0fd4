//! User × target-item preference matrices.
//!
//! The decayed matrix sums `exp(beta * t̂)` over every interaction of a user
//! with an item, where `t̂` is the interaction's interval index. Recent and
//! repeated interactions therefore weigh more. The binary matrix is the plain
//! interaction indicator.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, NetworkId};
use crate::linalg::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum MatrixKind {
    Decayed { beta: f64 },
    Binary,
}

/// Sparse non-negative matrix with rows in user order and columns in item order.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    kind: MatrixKind,
    as_of_interval: u32,
    num_cols: usize,
    /// Per row, `(column, value)` pairs sorted by column; zeros are not stored.
    rows: Vec<Vec<(usize, f64)>>,
    /// Number of interaction records visited while building.
    records_visited: usize,
}

impl PreferenceMatrix {
    /// Wraps a dense matrix; zero entries are dropped.
    pub fn from_dense(kind: MatrixKind, as_of_interval: u32, dense: &Matrix) -> Self {
        let rows = (0..dense.rows())
            .map(|i| {
                dense
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self {
            kind,
            as_of_interval,
            num_cols: dense.cols(),
            rows,
            records_visited: 0,
        }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn as_of_interval(&self) -> u32 {
        self.as_of_interval
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c).map_or(0.0, |pos| row[pos].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.rows.iter().flatten().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn records_visited(&self) -> usize {
        self.records_visited
    }

    /// Row `i` expanded to a dense vector of length `num_cols`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols];
        for &(j, v) in &self.rows[i] {
            out[j] = v;
        }
        out
    }

    /// `(row, col, value)` triples in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }
}

fn build(train: &Dataset, kind: MatrixKind, as_of: u32) -> Result<PreferenceMatrix> {
    train.require_intervals()?;
    let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); train.users().len()];
    let mut visited = 0;
    for r in train.interactions() {
        visited += 1;
        if r.network != NetworkId::Target || r.hidden || r.interval > as_of {
            continue;
        }
        let (Some(i), Some(j)) = (train.user_index(&r.user), train.item_index(&r.item)) else {
            continue;
        };
        let entry = acc[i].entry(j).or_insert(0.0);
        match kind {
            MatrixKind::Decayed { beta } => *entry += libm::exp(beta * f64::from(r.interval)),
            MatrixKind::Binary => *entry = 1.0,
        }
    }
    Ok(PreferenceMatrix {
        kind,
        as_of_interval: as_of,
        num_cols: train.items().len(),
        rows: acc.into_iter().map(|row| row.into_iter().collect()).collect(),
        records_visited: visited,
    })
}

/// Decayed matrix over intervals `[1, as_of]`, skipping hidden records.
pub fn build_decayed(train: &Dataset, beta: f64, as_of: u32) -> Result<PreferenceMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "must be finite",
        });
    }
    build(train, MatrixKind::Decayed { beta }, as_of)
}

/// Indicator matrix over all training intervals, skipping hidden records.
pub fn build_binary(train: &Dataset) -> Result<PreferenceMatrix> {
    build(train, MatrixKind::Binary, train.num_intervals())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{assign_intervals, Granularity, InteractionRecord, ItemCatalog};
    use proptest::prelude::*;

    const DAY: i64 = 86_400;

    fn dataset(records: &[(&str, &str, i64)]) -> Dataset {
        let mut c = ItemCatalog::new(1);
        for i in ["a", "b", "c"] {
            c.insert(NetworkId::Target, i, 0).unwrap();
        }
        c.insert(NetworkId::Source, "s", 0).unwrap();
        let mut recs: Vec<_> = records
            .iter()
            .map(|&(u, i, day)| InteractionRecord::new(u, NetworkId::Target, i, day * DAY))
            .collect();
        recs.push(InteractionRecord::new("u1", NetworkId::Source, "s", 0));
        let ds = Dataset::new(recs, c).unwrap();
        assign_intervals(&ds, Granularity::biweekly(0)).unwrap()
    }

    #[test]
    fn untouched_pairs_are_zero() {
        let ds = dataset(&[("u1", "a", 0), ("u2", "b", 0)]);
        let m = build_decayed(&ds, 0.8, ds.num_intervals()).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn beta_zero_gives_unit_weight() {
        let ds = dataset(&[("u1", "a", 14)]);
        let m = build_decayed(&ds, 0.0, 2).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn decayed_sum_of_two_intervals() {
        let ds = dataset(&[("u1", "a", 0), ("u1", "a", 28)]);
        let m = build_decayed(&ds, 0.8, 3).unwrap();
        // e^0.8 + e^2.4 from a 30-digit reference evaluation
        assert!((m.get(0, 0) - 13.248_717_309_134_069).abs() < 1e-12);
    }

    #[test]
    fn as_of_excludes_later_intervals() {
        let ds = dataset(&[("u1", "a", 0), ("u1", "a", 28)]);
        let m = build_decayed(&ds, 0.8, 2).unwrap();
        assert!((m.get(0, 0) - libm::exp(0.8)).abs() < 1e-15);
    }

    #[test]
    fn non_finite_beta_rejected() {
        let ds = dataset(&[("u1", "a", 0)]);
        assert!(build_decayed(&ds, f64::NAN, 1).is_err());
        assert!(build_decayed(&ds, f64::INFINITY, 1).is_err());
    }

    #[test]
    fn binary_indicator() {
        let ds = dataset(&[
            ("u1", "a", 0),
            ("u1", "a", 1),
            ("u1", "a", 2),
            ("u1", "a", 3),
            ("u1", "a", 15),
            ("u2", "c", 0),
        ]);
        let m = build_binary(&ds).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        let c = ds.item_index("c").unwrap();
        assert_eq!(m.get(0, c), 0.0);
        assert_eq!(m.get(1, c), 1.0);
    }

    #[test]
    fn recency_ratio_is_exp_beta() {
        let early = dataset(&[("u1", "a", 0)]);
        let late = dataset(&[("u1", "a", 14)]);
        let beta = 0.8;
        let e = build_decayed(&early, beta, 2).unwrap().get(0, 0);
        let l = build_decayed(&late, beta, 2).unwrap().get(0, 0);
        assert!(l > e);
        assert!((l / e - libm::exp(beta)).abs() < 1e-14);
    }

    #[test]
    fn hidden_records_are_excluded() {
        let ds = dataset(&[("u1", "a", 0), ("u2", "a", 0), ("u2", "b", 0)]);
        let p = crate::corpus::partition_users(&ds).unwrap();
        let m = build_binary(&p.train).unwrap();
        assert!(m.row(0).is_empty());
        assert_eq!(m.row(1).len(), 2);
    }

    proptest! {
        #[test]
        fn binary_equals_clamped_beta_zero(events in prop::collection::vec((0usize..4, 0usize..3, 0i64..40), 1..30)) {
            let users = ["u1", "u2", "u3", "u4"];
            let items = ["a", "b", "c"];
            let mut recs: Vec<(&str, &str, i64)> = events.iter().map(|&(u, i, d)| (users[u], items[i], d * 3600 / DAY)).collect();
            recs.sort();
            recs.dedup();
            let ds = dataset(&recs);
            let bin = build_binary(&ds).unwrap();
            let dec = build_decayed(&ds, 0.0, ds.num_intervals()).unwrap();
            for i in 0..bin.num_rows() {
                for j in 0..bin.num_cols() {
                    prop_assert_eq!(bin.get(i, j), dec.get(i, j).min(1.0));
                }
            }
        }

        #[test]
        fn adding_an_interaction_never_decreases(events in prop::collection::vec((0usize..3, 0usize..3, 0i64..40), 1..20), extra in (0usize..3, 0usize..3, 0i64..40)) {
            let users = ["u1", "u2", "u3"];
            let items = ["a", "b", "c"];
            let mut base: Vec<(&str, &str, i64)> = events.iter().map(|&(u, i, d)| (users[u], items[i], d)).collect();
            base.sort();
            base.dedup();
            let mut more = base.clone();
            let e = (users[extra.0], items[extra.1], extra.2);
            prop_assume!(!more.contains(&e));
            more.push(e);
            // fix the window so both datasets share intervals
            base.push(("u1", "a", 40));
            more.push(("u1", "a", 40));
            let a = dataset(&base);
            let b = dataset(&more);
            let ma = build_decayed(&a, 0.8, 3).unwrap();
            let mb = build_decayed(&b, 0.8, 3).unwrap();
            for (i, user) in a.users().iter().enumerate() {
                let ib = b.user_index(user).unwrap();
                for (j, item) in a.items().iter().enumerate() {
                    prop_assert!(mb.get(ib, b.item_index(item).unwrap()) >= ma.get(i, j));
                }
            }
        }
    }
}
