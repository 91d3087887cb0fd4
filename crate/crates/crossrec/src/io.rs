//! JSON Lines readers and writers for interaction logs and item catalogs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crossrec_core::corpus::{Dataset, InteractionRecord, ItemCatalog, NetworkId};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open {path}: {source}")]
    Open { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: PathBuf,
        line: usize,
        source: crossrec_core::Error,
    },
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: crossrec_core::Error },
}

/// One line of `interactions.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionLine {
    pub user: String,
    pub network: NetworkId,
    pub item: String,
    pub ts: i64,
}

/// One line of `catalog.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogLine {
    pub item: String,
    pub network: NetworkId,
    pub topic: u32,
}

/// Parses every non-blank line of a JSONL file, reporting 1-based line numbers.
fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>, IoError> {
    let file = File::open(path).map_err(|source| IoError::Open { path: path.into(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IoError::Read { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| IoError::Parse {
            path: path.into(),
            line: i + 1,
            source,
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn read_catalog(path: &Path, num_topics: u32) -> Result<ItemCatalog, IoError> {
    let mut catalog = ItemCatalog::new(num_topics);
    for (line, entry) in read_lines::<CatalogLine>(path)? {
        catalog
            .insert(entry.network, entry.item, entry.topic)
            .map_err(|source| IoError::Invalid {
                path: path.into(),
                line,
                source,
            })?;
    }
    Ok(catalog)
}

/// Loads both files into a dataset whose intervals are not yet assigned.
pub fn load_dataset(interactions: &Path, catalog: &Path, num_topics: u32) -> Result<Dataset, IoError> {
    let catalog = read_catalog(catalog, num_topics)?;
    let lines = read_lines::<InteractionLine>(interactions)?;
    let records = lines
        .into_iter()
        .map(|(_, l)| InteractionRecord::new(l.user, l.network, l.item, l.ts))
        .collect();
    Dataset::new(records, catalog).map_err(|source| IoError::Dataset {
        path: interactions.into(),
        source,
    })
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", path.display()))?);
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the dataset's records in their canonical order.
pub fn write_interactions(path: &Path, dataset: &Dataset) -> anyhow::Result<()> {
    write_jsonl(
        path,
        dataset.interactions().iter().map(|r| InteractionLine {
            user: r.user.clone(),
            network: r.network,
            item: r.item.clone(),
            ts: r.ts,
        }),
    )
}

/// Writes source items, then target items, each in id order.
pub fn write_catalog(path: &Path, catalog: &ItemCatalog) -> anyhow::Result<()> {
    write_jsonl(
        path,
        [NetworkId::Source, NetworkId::Target].into_iter().flat_map(|network| {
            catalog.items(network).map(move |(item, topic)| CatalogLine {
                item: item.into(),
                network,
                topic,
            })
        }),
    )
}
