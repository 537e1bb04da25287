//! Partitions of the entity universe into named clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EntityId;

/// Named, pairwise-disjoint, non-empty clusters of entities.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Decomposition {
    clusters: BTreeMap<String, BTreeSet<EntityId>>,
}

impl Decomposition {
    /// Validates that clusters are non-empty and pairwise disjoint.
    pub fn new(clusters: BTreeMap<String, BTreeSet<EntityId>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, members) in &clusters {
            if members.is_empty() {
                return Err(Error::InvalidDecomposition(format!("cluster `{name}` is empty")));
            }
            for e in members {
                if !seen.insert(*e) {
                    return Err(Error::InvalidDecomposition(format!(
                        "entity {e} appears in more than one cluster"
                    )));
                }
            }
        }
        Ok(Decomposition { clusters })
    }

    /// Clusters named `c0`, `c1`, ... in the given order.
    pub fn from_groups<I, G>(groups: I) -> Result<Self>
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = EntityId>,
    {
        let clusters = groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("c{i}"), g.into_iter().collect()))
            .collect();
        Decomposition::new(clusters)
    }

    pub fn single_cluster(universe: impl IntoIterator<Item = EntityId>) -> Result<Self> {
        Decomposition::from_groups([universe])
    }

    /// Every entity in its own cluster.
    pub fn singletons(universe: impl IntoIterator<Item = EntityId>) -> Self {
        Decomposition::from_groups(universe.into_iter().map(|e| [e])).expect("distinct singletons")
    }

    pub fn clusters(&self) -> &BTreeMap<String, BTreeSet<EntityId>> {
        &self.clusters
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn universe(&self) -> BTreeSet<EntityId> {
        self.clusters.values().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, e: EntityId) -> Option<&str> {
        self.clusters
            .iter()
            .find(|(_, m)| m.contains(&e))
            .map(|(n, _)| n.as_str())
    }

    /// Dense entity → cluster-index lookup; indices follow name order.
    pub fn assignment(&self) -> HashMap<EntityId, usize> {
        self.clusters
            .values()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |e| (*e, i)))
            .collect()
    }

    /// The clusters as a set of sets, ignoring names.
    pub fn as_partition(&self) -> BTreeSet<BTreeSet<EntityId>> {
        self.clusters.values().cloned().collect()
    }

    /// Equal as set partitions, ignoring cluster names.
    pub fn same_partition(&self, other: &Decomposition) -> bool {
        self.as_partition() == other.as_partition()
    }

    /// Checks that the clusters partition exactly `universe`.
    pub fn check_partition(&self, universe: &BTreeSet<EntityId>) -> Result<()> {
        let covered = self.universe();
        let missing: Vec<EntityId> = universe.difference(&covered).copied().collect();
        if !missing.is_empty() {
            return Err(Error::UnassignedEntity(missing));
        }
        if let Some(extra) = covered.difference(universe).next() {
            return Err(Error::InvalidDecomposition(format!(
                "entity {extra} is outside the universe"
            )));
        }
        Ok(())
    }

    /// Parses `{ "clusters": { "<name>": [id, ...] } }`.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            clusters: BTreeMap<String, Vec<EntityId>>,
        }
        let file: File = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            offset: e.column(),
            message: e.to_string(),
        })?;
        let mut clusters = BTreeMap::new();
        for (name, ids) in file.clusters {
            let set: BTreeSet<EntityId> = ids.iter().copied().collect();
            if set.len() != ids.len() {
                return Err(Error::InvalidDecomposition(format!(
                    "cluster `{name}` lists an entity twice"
                )));
            }
            clusters.insert(name, set);
        }
        Decomposition::new(clusters)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("decomposition serializes");
        s.push('\n');
        s
    }
}

/// Panics with a descriptive message unless `d` partitions `universe`.
pub fn assert_partition(d: &Decomposition, universe: &BTreeSet<EntityId>) {
    if let Err(e) = d.check_partition(universe) {
        panic!("not a partition of the universe: {e}");
    }
}
