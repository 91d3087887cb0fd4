use alloc::string::String;

use crate::corpus::NetworkId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("item {item:?} on the {network} network has topic {topic}, but only {num_topics} topics are configured")]
    TopicOutOfRange {
        network: NetworkId,
        item: String,
        topic: u32,
        num_topics: u32,
    },
    #[error("item {item:?} appears twice in the {network} catalog")]
    DuplicateCatalogItem { network: NetworkId, item: String },
    #[error("interaction references unknown {network} item {item:?}")]
    UnknownItem { network: NetworkId, item: String },
    #[error("duplicate interaction: user {user:?}, {network} item {item:?} at {ts}")]
    DuplicateInteraction {
        user: String,
        network: NetworkId,
        item: String,
        ts: i64,
    },
    #[error("timestamp {ts} precedes the observation window starting at {window_start}")]
    TimestampBeforeWindow { ts: i64, window_start: i64 },
    #[error("timestamp {0} cannot be represented as a calendar date")]
    InvalidTimestamp(i64),
    #[error("interval indices have not been assigned")]
    IntervalsUnassigned,
    #[error("train interval count {train_intervals} must lie in [1, {total}) for a dataset with {total} intervals")]
    SplitOutOfRange { train_intervals: u32, total: u32 },
    #[error("overlap is undefined: the user has no target interactions in any interval")]
    UndefinedOverlap,
    #[error("consecutive intersection is undefined: no pair of adjacent non-empty intervals")]
    UndefinedIntersection,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("unknown target item {0:?}")]
    UnknownTargetItem(String),
    #[error("user {0:?} has no training interactions on the target network")]
    NotAnExistingUser(String),
    #[error("training diverged in epoch {epoch} at observation {observation} (user {user}, item {item})")]
    Divergence {
        epoch: usize,
        observation: usize,
        user: usize,
        item: usize,
    },
    #[error("no existing users to average time vectors over")]
    NoExistingUsers,
    #[error("no target interactions in any training interval")]
    NoPopularItems,
    #[error("{0}")]
    Infeasible(&'static str),
}
