use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{DatasetManifest, Engine, ManifestEntry};

/// Allowed number of support RIRs per group.
pub const SUPPORT_RANGE: RangeInclusive<usize> = 4..=12;

/// Selects which manifest entries take part. `None` matches everything.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupFilter {
    pub engine: Option<Engine>,
    pub room_id: Option<String>,
    pub condition_id: Option<String>,
}

impl GroupFilter {
    pub fn matches(&self, e: &ManifestEntry) -> bool {
        self.engine.is_none_or(|x| x == e.engine)
            && self.room_id.as_ref().is_none_or(|x| *x == e.room_id)
            && self
                .condition_id
                .as_ref()
                .is_none_or(|x| *x == e.condition_id)
    }
}

/// One main RIR with support RIRs drawn from the same engine, room and condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalGroup {
    pub main: ManifestEntry,
    pub supports: Vec<ManifestEntry>,
}

/// Builds one group per selected entry, with that entry as main.
///
/// Entries are partitioned by (engine, room, condition); supports come uniformly without
/// replacement from the rest of the main's partition. Group `i` (in manifest order) draws
/// from ChaCha8 stream `i` of `seed`, so the result is independent of scheduling.
pub fn build_eval_groups(
    manifest: &DatasetManifest,
    filter: &GroupFilter,
    n_support: usize,
    seed: u64,
) -> Result<Vec<EvalGroup>> {
    if !SUPPORT_RANGE.contains(&n_support) {
        return Err(Error::InvalidArgument(format!(
            "n_support {n_support} outside {}..={}",
            SUPPORT_RANGE.start(),
            SUPPORT_RANGE.end()
        )));
    }
    let selected: Vec<&ManifestEntry> = manifest
        .entries
        .iter()
        .filter(|e| filter.matches(e))
        .collect();
    if selected.is_empty() {
        return Err(Error::InsufficientEntries {
            available: 0,
            required: n_support,
        });
    }
    let mut partitions: BTreeMap<(Engine, &str, &str), Vec<usize>> = BTreeMap::new();
    for (i, e) in selected.iter().enumerate() {
        partitions
            .entry((e.engine, e.room_id.as_str(), e.condition_id.as_str()))
            .or_default()
            .push(i);
    }
    if let Some(small) = partitions.values().find(|p| p.len() <= n_support) {
        return Err(Error::InsufficientEntries {
            available: small.len(),
            required: n_support,
        });
    }
    let mut groups = Vec::with_capacity(selected.len());
    for (i, main) in selected.iter().enumerate() {
        let part = &partitions[&(
            main.engine,
            main.room_id.as_str(),
            main.condition_id.as_str(),
        )];
        let others: Vec<usize> = part.iter().copied().filter(|&j| j != i).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let picks = rand::seq::index::sample(&mut rng, others.len(), n_support);
        groups.push(EvalGroup {
            main: (*main).clone(),
            supports: picks.iter().map(|k| selected[others[k]].clone()).collect(),
        });
    }
    Ok(groups)
}
