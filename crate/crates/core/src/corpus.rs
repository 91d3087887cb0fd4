//! Interaction logs, item catalog, interval assignment and temporal splits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const DAY_SECONDS: i64 = 86_400;
const BIWEEK_SECONDS: i64 = 14 * DAY_SECONDS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkId {
    Source,
    Target,
}

impl NetworkId {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkId::Source => "source",
            NetworkId::Target => "target",
        }
    }
}

impl fmt::Display for NetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One timestamped interaction of a user with an item on one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub user: String,
    pub network: NetworkId,
    pub item: String,
    /// Seconds since the Unix epoch, UTC.
    pub ts: i64,
    /// 1-based interval index; 0 until [`assign_intervals`] runs.
    pub interval: u32,
    /// Target interactions of new users are kept but hidden from training.
    pub hidden: bool,
}

impl InteractionRecord {
    pub fn new(user: impl Into<String>, network: NetworkId, item: impl Into<String>, ts: i64) -> Self {
        Self {
            user: user.into(),
            network,
            item: item.into(),
            ts,
            interval: 0,
            hidden: false,
        }
    }

    fn sort_key(&self) -> (i64, &str, NetworkId, &str) {
        (self.ts, &self.user, self.network, &self.item)
    }
}

/// Hard topic label for every item, keyed per network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemCatalog {
    num_topics: u32,
    source: BTreeMap<String, u32>,
    target: BTreeMap<String, u32>,
}

impl ItemCatalog {
    pub fn new(num_topics: u32) -> Self {
        Self {
            num_topics,
            source: BTreeMap::new(),
            target: BTreeMap::new(),
        }
    }

    pub fn num_topics(&self) -> u32 {
        self.num_topics
    }

    pub fn insert(&mut self, network: NetworkId, item: impl Into<String>, topic: u32) -> Result<()> {
        let item = item.into();
        if topic >= self.num_topics {
            return Err(Error::TopicOutOfRange {
                network,
                item,
                topic,
                num_topics: self.num_topics,
            });
        }
        let map = self.map_mut(network);
        if map.contains_key(&item) {
            return Err(Error::DuplicateCatalogItem { network, item });
        }
        map.insert(item, topic);
        Ok(())
    }

    pub fn topic(&self, network: NetworkId, item: &str) -> Option<u32> {
        self.map(network).get(item).copied()
    }

    /// Items of one network in lexicographic order, with their topics.
    pub fn items(&self, network: NetworkId) -> impl Iterator<Item = (&str, u32)> {
        self.map(network).iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self, network: NetworkId) -> usize {
        self.map(network).len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty() && self.target.is_empty()
    }

    fn map(&self, network: NetworkId) -> &BTreeMap<String, u32> {
        match network {
            NetworkId::Source => &self.source,
            NetworkId::Target => &self.target,
        }
    }

    fn map_mut(&mut self, network: NetworkId) -> &mut BTreeMap<String, u32> {
        match network {
            NetworkId::Source => &mut self.source,
            NetworkId::Target => &mut self.target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GranularityKind {
    Biweekly,
    Monthly,
}

impl fmt::Display for GranularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GranularityKind::Biweekly => "biweekly",
            GranularityKind::Monthly => "monthly",
        })
    }
}

/// How timestamps map onto 1-based interval indices.
///
/// Biweekly intervals are consecutive 14-day spans starting at
/// `window_start`. Monthly intervals are UTC calendar months, the first
/// being the month that contains `window_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Granularity {
    pub kind: GranularityKind,
    pub window_start: i64,
}

impl Granularity {
    pub fn biweekly(window_start: i64) -> Self {
        Self {
            kind: GranularityKind::Biweekly,
            window_start,
        }
    }

    pub fn monthly(window_start: i64) -> Self {
        Self {
            kind: GranularityKind::Monthly,
            window_start,
        }
    }

    pub fn interval_of(&self, ts: i64) -> Result<u32> {
        if ts < self.window_start {
            return Err(Error::TimestampBeforeWindow {
                ts,
                window_start: self.window_start,
            });
        }
        let zero_based = match self.kind {
            GranularityKind::Biweekly => (ts - self.window_start) / BIWEEK_SECONDS,
            GranularityKind::Monthly => {
                let (y0, m0) = year_month(self.window_start)?;
                let (y, m) = year_month(ts)?;
                (y - y0) * 12 + (m - m0)
            }
        };
        u32::try_from(zero_based + 1).map_err(|_| Error::InvalidTimestamp(ts))
    }

    /// First timestamp belonging to interval `index` (1-based). For monthly
    /// granularity interval 1 starts at `window_start` itself.
    pub fn interval_start(&self, index: u32) -> Result<i64> {
        if index <= 1 {
            return Ok(self.window_start);
        }
        let offset = i64::from(index - 1);
        match self.kind {
            GranularityKind::Biweekly => Ok(self.window_start + offset * BIWEEK_SECONDS),
            GranularityKind::Monthly => {
                let (y0, m0) = year_month(self.window_start)?;
                let months = y0 * 12 + (m0 - 1) + offset;
                let (y, m) = (months.div_euclid(12), months.rem_euclid(12) + 1);
                let date = i32::try_from(y)
                    .ok()
                    .and_then(|y| NaiveDate::from_ymd_opt(y, m as u32, 1))
                    .ok_or(Error::InvalidTimestamp(self.window_start))?;
                Ok(date
                    .and_hms_opt(0, 0, 0)
                    .ok_or(Error::InvalidTimestamp(self.window_start))?
                    .and_utc()
                    .timestamp())
            }
        }
    }
}

fn year_month(ts: i64) -> Result<(i64, i64)> {
    let dt = DateTime::from_timestamp(ts, 0).ok_or(Error::InvalidTimestamp(ts))?;
    Ok((i64::from(dt.year()), i64::from(dt.month())))
}

/// An interaction log together with its catalog and stable user/item orderings.
///
/// `users` and `items` are lexicographically sorted; their positions are the
/// row and column indices used by every matrix downstream. `items` lists
/// target-network items only.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    interactions: Vec<InteractionRecord>,
    catalog: Arc<ItemCatalog>,
    granularity: Option<Granularity>,
    num_intervals: u32,
    users: Vec<String>,
    items: Vec<String>,
}

impl Dataset {
    /// Validates referential integrity and uniqueness, then orders the
    /// records by `(ts, user, network, item)`. Intervals are left unassigned.
    pub fn new(mut interactions: Vec<InteractionRecord>, catalog: ItemCatalog) -> Result<Self> {
        for r in &interactions {
            if catalog.topic(r.network, &r.item).is_none() {
                return Err(Error::UnknownItem {
                    network: r.network,
                    item: r.item.clone(),
                });
            }
        }
        interactions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        if let Some(w) = interactions.windows(2).find(|w| w[0].sort_key() == w[1].sort_key()) {
            let r = &w[1];
            return Err(Error::DuplicateInteraction {
                user: r.user.clone(),
                network: r.network,
                item: r.item.clone(),
                ts: r.ts,
            });
        }
        for r in &mut interactions {
            r.interval = 0;
        }
        Ok(Self::from_sorted(interactions, Arc::new(catalog), None, 0))
    }

    fn from_sorted(
        interactions: Vec<InteractionRecord>,
        catalog: Arc<ItemCatalog>,
        granularity: Option<Granularity>,
        num_intervals: u32,
    ) -> Self {
        let users: BTreeSet<&str> = interactions.iter().map(|r| r.user.as_str()).collect();
        let items: BTreeSet<&str> = interactions
            .iter()
            .filter(|r| r.network == NetworkId::Target)
            .map(|r| r.item.as_str())
            .collect();
        let users = users.into_iter().map(String::from).collect();
        let items = items.into_iter().map(String::from).collect();
        Self {
            interactions,
            catalog,
            granularity,
            num_intervals,
            users,
            items,
        }
    }

    /// Same orderings as `self`, different records.
    fn derive(&self, interactions: Vec<InteractionRecord>, num_intervals: u32) -> Self {
        Self {
            interactions,
            catalog: Arc::clone(&self.catalog),
            granularity: self.granularity,
            num_intervals,
            users: self.users.clone(),
            items: self.items.clone(),
        }
    }

    pub fn interactions(&self) -> &[InteractionRecord] {
        &self.interactions
    }

    pub fn catalog(&self) -> &ItemCatalog {
        &self.catalog
    }

    pub fn granularity(&self) -> Option<Granularity> {
        self.granularity
    }

    /// Number of intervals `T`; zero while intervals are unassigned.
    pub fn num_intervals(&self) -> u32 {
        self.num_intervals
    }

    pub fn num_topics(&self) -> usize {
        self.catalog.num_topics() as usize
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn user_index(&self, user: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(user)).ok()
    }

    pub fn item_index(&self, item: &str) -> Option<usize> {
        self.items.binary_search_by(|i| i.as_str().cmp(item)).ok()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn topic_of(&self, record: &InteractionRecord) -> u32 {
        self.catalog
            .topic(record.network, &record.item)
            .expect("dataset records always resolve in the catalog")
    }

    /// Set of target items each user interacted with, including hidden ones.
    pub fn target_items_by_user(&self) -> Vec<BTreeSet<usize>> {
        let mut out = alloc::vec![BTreeSet::new(); self.users.len()];
        for r in self.interactions.iter().filter(|r| r.network == NetworkId::Target) {
            if let (Some(u), Some(j)) = (self.user_index(&r.user), self.item_index(&r.item)) {
                out[u].insert(j);
            }
        }
        out
    }

    pub fn require_intervals(&self) -> Result<()> {
        if self.num_intervals == 0 {
            Err(Error::IntervalsUnassigned)
        } else {
            Ok(())
        }
    }

    /// Drops every record after interval `last`, keeping orderings.
    pub fn restrict_intervals(&self, last: u32) -> Result<Self> {
        self.require_intervals()?;
        let kept = self.interactions.iter().filter(|r| r.interval <= last).cloned().collect();
        Ok(self.derive(kept, last.min(self.num_intervals)))
    }
}

/// Assigns every record its 1-based interval; `T` becomes the latest interval
/// that contains a record.
pub fn assign_intervals(dataset: &Dataset, granularity: Granularity) -> Result<Dataset> {
    let mut records = dataset.interactions.clone();
    let mut last = 0;
    for r in &mut records {
        r.interval = granularity.interval_of(r.ts)?;
        last = last.max(r.interval);
    }
    let mut out = dataset.derive(records, last);
    out.granularity = Some(granularity);
    Ok(out)
}

/// Drops users with fewer than `min_user_per_network` interactions on either
/// network and target items with fewer than `min_item` interactions, repeating
/// until both constraints hold at once.
pub fn filter_activity(dataset: &Dataset, min_user_per_network: usize, min_item: usize) -> Dataset {
    let mut records = dataset.interactions.clone();
    loop {
        let before = records.len();

        let mut per_user: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
        for r in &records {
            per_user.entry(&r.user).or_default()[r.network as usize] += 1;
        }
        let dropped_users: BTreeSet<String> = per_user
            .iter()
            .filter(|(_, c)| c[0] < min_user_per_network || c[1] < min_user_per_network)
            .map(|(u, _)| String::from(*u))
            .collect();
        records.retain(|r| !dropped_users.contains(&r.user));

        let mut per_item: BTreeMap<&str, usize> = BTreeMap::new();
        for r in records.iter().filter(|r| r.network == NetworkId::Target) {
            *per_item.entry(&r.item).or_default() += 1;
        }
        let dropped_items: BTreeSet<String> = per_item
            .iter()
            .filter(|(_, &c)| c < min_item)
            .map(|(i, _)| String::from(*i))
            .collect();
        records.retain(|r| r.network != NetworkId::Target || !dropped_items.contains(&r.item));

        if records.len() == before {
            break;
        }
    }
    let last = if dataset.num_intervals == 0 {
        0
    } else {
        records.iter().map(|r| r.interval).max().unwrap_or(0)
    };
    let mut out = Dataset::from_sorted(records, Arc::clone(&dataset.catalog), dataset.granularity, last);
    if dataset.num_intervals > 0 && out.num_intervals == 0 {
        // Empty but previously assigned; keep T so downstream checks stay meaningful.
        out.num_intervals = dataset.num_intervals;
    }
    out
}

/// A leakage-free split: every train timestamp precedes every test timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSplit {
    /// First timestamp of the first test interval.
    pub threshold: i64,
    pub train: Dataset,
    pub test: Dataset,
}

/// Puts intervals `[1, train_intervals]` in train and the rest in test.
///
/// Both halves keep the parent's user and item orderings. The test half keeps
/// the original interval indices, so its `T` equals the parent's.
pub fn time_split(dataset: &Dataset, train_intervals: u32) -> Result<TimeSplit> {
    dataset.require_intervals()?;
    let total = dataset.num_intervals;
    if train_intervals < 1 || train_intervals >= total {
        return Err(Error::SplitOutOfRange { train_intervals, total });
    }
    let granularity = dataset.granularity.ok_or(Error::IntervalsUnassigned)?;
    let (train, test): (Vec<_>, Vec<_>) = dataset.interactions.iter().cloned().partition(|r| r.interval <= train_intervals);
    Ok(TimeSplit {
        threshold: granularity.interval_start(train_intervals + 1)?,
        train: dataset.derive(train, train_intervals),
        test: dataset.derive(test, total),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    New,
    Existing,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::New => "new",
            GroupKind::Existing => "existing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserGroup {
    pub kind: GroupKind,
    pub members: BTreeSet<String>,
}

impl UserGroup {
    pub fn contains(&self, user: &str) -> bool {
        self.members.contains(user)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Result of [`partition_users`]: the training set with new users' target
/// interactions marked hidden, and the two disjoint groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub train: Dataset,
    pub new: UserGroup,
    pub existing: UserGroup,
}

impl Partition {
    pub fn group_of(&self, user: &str) -> GroupKind {
        if self.new.contains(user) {
            GroupKind::New
        } else {
            GroupKind::Existing
        }
    }
}

/// Sorts users ascending by target training interaction count (ties by user
/// id) and gives the lower half to the new group. With an odd user count the
/// new group receives the extra user.
pub fn partition_users(train: &Dataset) -> Result<Partition> {
    train.require_intervals()?;
    let mut counts: BTreeMap<&str, usize> = train.users.iter().map(|u| (u.as_str(), 0)).collect();
    for r in train.interactions.iter().filter(|r| r.network == NetworkId::Target) {
        *counts.entry(&r.user).or_default() += 1;
    }
    let mut order: Vec<(&str, usize)> = counts.into_iter().collect();
    order.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let new_len = order.len().div_ceil(2);
    let new: BTreeSet<String> = order[..new_len].iter().map(|(u, _)| String::from(*u)).collect();
    let existing: BTreeSet<String> = order[new_len..].iter().map(|(u, _)| String::from(*u)).collect();

    let mut records = train.interactions.clone();
    for r in &mut records {
        r.hidden = r.network == NetworkId::Target && new.contains(&r.user);
    }
    Ok(Partition {
        train: train.derive(records, train.num_intervals),
        new: UserGroup {
            kind: GroupKind::New,
            members: new,
        },
        existing: UserGroup {
            kind: GroupKind::Existing,
            members: existing,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const MAR_1_2015: i64 = 1_425_168_000;

    fn catalog() -> ItemCatalog {
        let mut c = ItemCatalog::new(3);
        for (i, t) in [("s1", 0), ("s2", 1), ("s3", 2)] {
            c.insert(NetworkId::Source, i, t).unwrap();
        }
        for (i, t) in [("v1", 0), ("v2", 1), ("v3", 2)] {
            c.insert(NetworkId::Target, i, t).unwrap();
        }
        c
    }

    fn rec(user: &str, network: NetworkId, item: &str, day: i64) -> InteractionRecord {
        InteractionRecord::new(user, network, item, MAR_1_2015 + day * DAY_SECONDS)
    }

    #[test]
    fn three_valid_records_load() {
        let ds = Dataset::new(
            vec![
                rec("u1", NetworkId::Source, "s1", 0),
                rec("u1", NetworkId::Target, "v1", 1),
                rec("u2", NetworkId::Target, "v2", 2),
            ],
            catalog(),
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.num_intervals(), 0);
        assert_eq!(ds.users(), ["u1", "u2"]);
        assert_eq!(ds.items(), ["v1", "v2"]);
    }

    #[test]
    fn catalog_rejects_topic_equal_to_count() {
        let mut c = ItemCatalog::new(3);
        assert!(matches!(
            c.insert(NetworkId::Target, "v", 3),
            Err(Error::TopicOutOfRange { topic: 3, .. })
        ));
        c.insert(NetworkId::Target, "v", 2).unwrap();
        assert!(c.insert(NetworkId::Target, "v", 1).is_err());
        c.insert(NetworkId::Source, "v", 1).unwrap();
    }

    #[test]
    fn duplicate_quadruple_is_named() {
        let err = Dataset::new(
            vec![rec("u1", NetworkId::Target, "v1", 3), rec("u1", NetworkId::Target, "v1", 3)],
            catalog(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::DuplicateInteraction {
                user: "u1".into(),
                network: NetworkId::Target,
                item: "v1".into(),
                ts: MAR_1_2015 + 3 * DAY_SECONDS,
            }
        );
    }

    #[test]
    fn unknown_item_is_named() {
        let err = Dataset::new(vec![rec("u1", NetworkId::Target, "s1", 0)], catalog()).unwrap_err();
        assert!(matches!(err, Error::UnknownItem { ref item, .. } if item == "s1"));
    }

    #[test]
    fn biweekly_boundary() {
        let g = Granularity::biweekly(MAR_1_2015);
        // day 1 and day 15 in 1-based calendar terms
        assert_eq!(g.interval_of(MAR_1_2015).unwrap(), 1);
        assert_eq!(g.interval_of(MAR_1_2015 + 13 * DAY_SECONDS + 86_399).unwrap(), 1);
        assert_eq!(g.interval_of(MAR_1_2015 + 14 * DAY_SECONDS).unwrap(), 2);
        assert!(matches!(g.interval_of(MAR_1_2015 - 1), Err(Error::TimestampBeforeWindow { .. })));
    }

    #[test]
    fn monthly_same_calendar_month() {
        let g = Granularity::monthly(MAR_1_2015);
        assert_eq!(g.interval_of(MAR_1_2015 + 30 * DAY_SECONDS).unwrap(), 1);
        assert_eq!(g.interval_of(MAR_1_2015 + 31 * DAY_SECONDS).unwrap(), 2);
        // 29 Feb 2016 is the last day of the twelfth month
        assert_eq!(g.interval_of(1_456_704_000).unwrap(), 12);
        assert_eq!(g.interval_start(2).unwrap(), MAR_1_2015 + 31 * DAY_SECONDS);
        assert_eq!(g.interval_start(12).unwrap(), 1_454_284_800);
    }

    #[test]
    fn monthly_window_starting_mid_month() {
        let start = MAR_1_2015 + 20 * DAY_SECONDS;
        let g = Granularity::monthly(start);
        assert_eq!(g.interval_of(start).unwrap(), 1);
        assert_eq!(g.interval_of(MAR_1_2015 + 31 * DAY_SECONDS).unwrap(), 2);
        assert_eq!(g.interval_start(1).unwrap(), start);
    }

    #[test]
    fn twelve_month_span_biweekly_interval_count() {
        // Brute force: walk 14-day windows from the start until one covers the last event.
        for (first, last) in [(0, 364), (0, 365), (3, 367)] {
            let start = MAR_1_2015 + first * DAY_SECONDS;
            let end = MAR_1_2015 + last * DAY_SECONDS;
            let mut windows = 0;
            let mut lo = start;
            loop {
                windows += 1;
                if end < lo + BIWEEK_SECONDS {
                    break;
                }
                lo += BIWEEK_SECONDS;
            }
            let g = Granularity::biweekly(start);
            assert_eq!(g.interval_of(end).unwrap(), windows);
            assert!(windows == 26 || windows == 27);
        }
    }

    fn user_fixture(user: &str, source: usize, target: &[&str], out: &mut Vec<InteractionRecord>) {
        let s_items = ["s1", "s2", "s3"];
        for k in 0..source {
            out.push(rec(user, NetworkId::Source, s_items[k % 3], k as i64));
        }
        for (k, item) in target.iter().enumerate() {
            out.push(rec(user, NetworkId::Target, item, 100 + k as i64));
        }
    }

    #[test]
    fn filter_removes_user_short_on_one_network() {
        let mut recs = vec![];
        user_fixture("u1", 4, &["v1"; 9], &mut recs);
        user_fixture("u2", 5, &["v1", "v1", "v1", "v1", "v1"], &mut recs);
        let ds = Dataset::new(recs, catalog()).unwrap();
        let out = filter_activity(&ds, 5, 2);
        assert_eq!(out.users(), ["u2"]);
    }

    #[test]
    fn zero_thresholds_are_no_op() {
        let mut recs = vec![];
        user_fixture("u1", 1, &["v1"], &mut recs);
        user_fixture("u2", 0, &["v2", "v3"], &mut recs);
        let ds = Dataset::new(recs, catalog()).unwrap();
        assert_eq!(filter_activity(&ds, 0, 0), ds);
    }

    #[test]
    fn filter_cascades_to_fixed_point() {
        // u3 has exactly 5 target interactions, one of them on v3 which only
        // u3 touches. Dropping v3 (1 < 2) leaves u3 with 4, which drops u3,
        // which in turn leaves v2 with a single interaction from u2.
        let mut recs = vec![];
        user_fixture("u1", 5, &["v1", "v1", "v1", "v1", "v1"], &mut recs);
        user_fixture("u2", 5, &["v1", "v1", "v1", "v1", "v2"], &mut recs);
        user_fixture("u3", 5, &["v1", "v2", "v2", "v2", "v3"], &mut recs);
        let ds = Dataset::new(recs, catalog()).unwrap();
        let out = filter_activity(&ds, 5, 2);
        // after u3 goes, u2 has v1x4 + v2x1; v2 drops, u2 falls to 4 and goes too
        assert_eq!(out.users(), ["u1"]);
        assert_eq!(out.items(), ["v1"]);
        assert_eq!(filter_activity(&out, 5, 2), out);
    }

    fn assigned(records: Vec<InteractionRecord>) -> Dataset {
        let ds = Dataset::new(records, catalog()).unwrap();
        assign_intervals(&ds, Granularity::biweekly(MAR_1_2015)).unwrap()
    }

    #[test]
    fn split_train_interval_count_from_week_table() {
        // 48 weeks biweekly, first 40 weeks for training
        let recs = (0..48 * 7 / 14).map(|k| rec("u1", NetworkId::Target, "v1", k * 14)).collect();
        let ds = assigned(recs);
        assert_eq!(ds.num_intervals(), 24);
        let split = time_split(&ds, 40 / 2).unwrap();
        assert_eq!(split.train.num_intervals(), 20);
        let test_intervals: BTreeSet<u32> = split.test.interactions().iter().map(|r| r.interval).collect();
        assert_eq!(test_intervals.len(), 4);
        assert!(matches!(time_split(&ds, 24), Err(Error::SplitOutOfRange { .. })));
        assert!(time_split(&ds, 0).is_err());
    }

    #[test]
    fn split_requires_intervals() {
        let ds = Dataset::new(vec![rec("u1", NetworkId::Target, "v1", 0)], catalog()).unwrap();
        assert_eq!(time_split(&ds, 1).unwrap_err(), Error::IntervalsUnassigned);
    }

    fn users_with_target_counts(counts: &[(&str, usize)]) -> Dataset {
        let mut recs = vec![];
        for (u, c) in counts {
            recs.push(rec(u, NetworkId::Source, "s1", 0));
            for k in 0..*c {
                recs.push(rec(u, NetworkId::Target, "v1", k as i64));
            }
        }
        assigned(recs)
    }

    #[test]
    fn even_partition_by_count() {
        let ds = users_with_target_counts(&[("u4", 4), ("u1", 1), ("u3", 3), ("u2", 2)]);
        let p = partition_users(&ds).unwrap();
        assert_eq!(p.new.members.iter().collect::<Vec<_>>(), ["u1", "u2"]);
        assert_eq!(p.existing.members.iter().collect::<Vec<_>>(), ["u3", "u4"]);
        let hidden: Vec<_> = p
            .train
            .interactions()
            .iter()
            .filter(|r| r.hidden)
            .map(|r| r.user.as_str())
            .collect();
        assert_eq!(hidden, ["u1", "u2", "u2"]);
        assert!(p.train.interactions().iter().all(|r| !r.hidden || r.network == NetworkId::Target));
    }

    #[test]
    fn odd_partition_gives_new_the_extra_user() {
        let ds = users_with_target_counts(&[("a", 1), ("b", 2), ("c", 3), ("d", 4), ("e", 5)]);
        let p = partition_users(&ds).unwrap();
        assert_eq!(p.new.len(), 3);
        assert_eq!(p.existing.len(), 2);
    }

    #[test]
    fn partition_ties_break_by_user_id() {
        let ds = users_with_target_counts(&[("zed", 2), ("amy", 2), ("bob", 2), ("cat", 2)]);
        let p = partition_users(&ds).unwrap();
        assert_eq!(p.new.members.iter().collect::<Vec<_>>(), ["amy", "bob"]);
    }
}
