//! Monoliths, traces and accesses, plus the restriction operations used when
//! comparing two data collections over their common ground.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque numeric identifier of a domain entity.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct EntityId(pub i64);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for EntityId {
    fn from(id: i64) -> Self {
        EntityId(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "R")]
    Read,
    #[serde(rename = "W")]
    Write,
}

impl Mode {
    pub fn inverse(self) -> Mode {
        match self {
            Mode::Read => Mode::Write,
            Mode::Write => Mode::Read,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Read => "R",
            Mode::Write => "W",
        }
    }
}

/// A single read or write of a domain entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Access {
    pub entity: EntityId,
    pub mode: Mode,
}

impl Access {
    pub fn new(entity: impl Into<EntityId>, mode: Mode) -> Self {
        Access { entity: entity.into(), mode }
    }

    pub fn read(entity: impl Into<EntityId>) -> Self {
        Access::new(entity, Mode::Read)
    }

    pub fn write(entity: impl Into<EntityId>) -> Self {
        Access::new(entity, Mode::Write)
    }

    /// The same entity accessed in the opposite mode.
    pub fn inverse(self) -> Self {
        Access { entity: self.entity, mode: self.mode.inverse() }
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.entity, self.mode.as_str())
    }
}

/// One observed execution of a functionality. The position in `accesses`
/// is the precedence order: every trace is a linear chain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub id: u64,
    pub accesses: Vec<Access>,
}

impl Trace {
    pub fn new(id: u64, accesses: Vec<Access>) -> Self {
        Trace { id, accesses }
    }

    pub fn len(&self) -> usize {
        self.accesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accesses.is_empty()
    }
}

/// A controller of the monolith together with its observed traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functionality {
    pub name: String,
    pub traces: Vec<Trace>,
}

impl Functionality {
    pub fn new(name: impl Into<String>, traces: Vec<Trace>) -> Self {
        Functionality { name: name.into(), traces }
    }

    /// Functionality with a single trace of id 0.
    pub fn with_accesses(name: impl Into<String>, accesses: Vec<Access>) -> Self {
        Functionality::new(name, vec![Trace::new(0, accesses)])
    }

    pub fn entities(&self) -> BTreeSet<EntityId> {
        self.traces
            .iter()
            .flat_map(|t| t.accesses.iter().map(|a| a.entity))
            .collect()
    }
}

/// Functionalities, the entity universe, and per-functionality traces.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Monolith {
    functionalities: BTreeMap<String, Functionality>,
    entities: BTreeMap<EntityId, Option<String>>,
}

impl Monolith {
    /// Builds a monolith. Entities referenced by traces but missing from
    /// `entities` are added without a display name.
    pub fn new(
        functionalities: impl IntoIterator<Item = Functionality>,
        mut entities: BTreeMap<EntityId, Option<String>>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for f in functionalities {
            for t in &f.traces {
                for a in &t.accesses {
                    entities.entry(a.entity).or_insert(None);
                }
            }
            let name = f.name.clone();
            if map.insert(name.clone(), f).is_some() {
                return Err(Error::Schema {
                    location: format!("functionalities/{name}"),
                    message: "duplicate functionality name".into(),
                });
            }
        }
        Ok(Monolith { functionalities: map, entities })
    }

    /// Monolith whose entity universe is exactly the accessed entities.
    pub fn from_functionalities(functionalities: impl IntoIterator<Item = Functionality>) -> Result<Self> {
        Monolith::new(functionalities, BTreeMap::new())
    }

    pub fn functionalities(&self) -> impl ExactSizeIterator<Item = &Functionality> {
        self.functionalities.values()
    }

    pub fn functionality(&self, name: &str) -> Option<&Functionality> {
        self.functionalities.get(name)
    }

    pub fn functionality_names(&self) -> BTreeSet<String> {
        self.functionalities.keys().cloned().collect()
    }

    pub fn entities(&self) -> &BTreeMap<EntityId, Option<String>> {
        &self.entities
    }

    /// Entity ids in ascending order; this is the row order of every matrix.
    pub fn entity_ids(&self) -> Vec<EntityId> {
        self.entities.keys().copied().collect()
    }

    pub fn entity_set(&self) -> BTreeSet<EntityId> {
        self.entities.keys().copied().collect()
    }

    pub fn entity_name(&self, id: EntityId) -> Option<&str> {
        self.entities.get(&id).and_then(|n| n.as_deref())
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_functionalities(&self) -> usize {
        self.functionalities.len()
    }

    pub fn traces(&self) -> impl Iterator<Item = (&Functionality, &Trace)> {
        self.functionalities
            .values()
            .flat_map(|f| f.traces.iter().map(move |t| (f, t)))
    }
}

/// Result of [`restrict_monolith`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restricted {
    pub monolith: Monolith,
    /// Functionalities dropped because every trace became empty.
    pub dropped_functionalities: Vec<String>,
}

/// Keeps only the given functionalities and entities. Accesses to dropped
/// entities are removed in order; traces that become empty are dropped, and
/// so are functionalities left without traces.
pub fn restrict_monolith(
    m: &Monolith,
    keep_functionalities: &BTreeSet<String>,
    keep_entities: &BTreeSet<EntityId>,
) -> Result<Restricted> {
    if let Some(name) = keep_functionalities.iter().find(|n| !m.functionalities.contains_key(*n)) {
        return Err(Error::UnknownFunctionality(name.clone()));
    }
    if let Some(id) = keep_entities.iter().find(|e| !m.entities.contains_key(e)) {
        return Err(Error::UnknownEntity(*id));
    }

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for name in keep_functionalities {
        let f = &m.functionalities[name];
        let traces: Vec<Trace> = f
            .traces
            .iter()
            .filter_map(|t| {
                let accesses: Vec<Access> = t
                    .accesses
                    .iter()
                    .filter(|a| keep_entities.contains(&a.entity))
                    .copied()
                    .collect();
                (!accesses.is_empty()).then(|| Trace::new(t.id, accesses))
            })
            .collect();
        if traces.is_empty() {
            dropped.push(name.clone());
        } else {
            kept.push(Functionality::new(name.clone(), traces));
        }
    }
    let entities = keep_entities
        .iter()
        .map(|e| (*e, m.entities[e].clone()))
        .collect();
    Ok(Restricted {
        monolith: Monolith::new(kept, entities)?,
        dropped_functionalities: dropped,
    })
}

/// Functionalities and entities present in both monoliths. Entities are
/// matched by display name when both sides name them, otherwise by id, so the
/// matched ids are reported per side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommonSubset {
    pub functionalities: BTreeSet<String>,
    /// Matched pairs `(id in a, id in b)`.
    pub entity_pairs: Vec<(EntityId, EntityId)>,
}

impl CommonSubset {
    pub fn entities_in_a(&self) -> BTreeSet<EntityId> {
        self.entity_pairs.iter().map(|p| p.0).collect()
    }

    pub fn entities_in_b(&self) -> BTreeSet<EntityId> {
        self.entity_pairs.iter().map(|p| p.1).collect()
    }
}

pub fn common_subset(a: &Monolith, b: &Monolith) -> CommonSubset {
    let functionalities = a
        .functionalities
        .keys()
        .filter(|n| b.functionalities.contains_key(*n))
        .cloned()
        .collect();

    let mut b_by_name: BTreeMap<&str, EntityId> = BTreeMap::new();
    for (id, name) in &b.entities {
        if let Some(name) = name {
            b_by_name.entry(name.as_str()).or_insert(*id);
        }
    }

    let mut used_b = BTreeSet::new();
    let mut entity_pairs = Vec::new();
    for (id, name) in &a.entities {
        let by_id = b.entities.get(id);
        let matched = match (name, by_id) {
            (Some(name), Some(Some(other))) if name == other => Some(*id),
            (Some(name), _) if b_by_name.contains_key(name.as_str()) => Some(b_by_name[name.as_str()]),
            (Some(_), Some(Some(_))) => None,
            (_, Some(_)) => Some(*id),
            (None, None) => None,
            (Some(_), None) => None,
        };
        if let Some(bid) = matched {
            if used_b.insert(bid) {
                entity_pairs.push((*id, bid));
            }
        }
    }
    CommonSubset { functionalities, entity_pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(fs: Vec<Functionality>) -> Monolith {
        Monolith::from_functionalities(fs).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn ids(xs: &[i64]) -> BTreeSet<EntityId> {
        xs.iter().map(|&i| EntityId(i)).collect()
    }

    #[test]
    fn restrict_to_everything_is_identity() {
        let mono = m(vec![
            Functionality::with_accesses("f1", vec![Access::read(1), Access::write(2)]),
            Functionality::with_accesses("f2", vec![Access::read(2)]),
        ]);
        let r = restrict_monolith(&mono, &mono.functionality_names(), &mono.entity_set()).unwrap();
        assert_eq!(r.monolith, mono);
        assert!(r.dropped_functionalities.is_empty());
    }

    #[test]
    fn restrict_preserves_order_of_remaining_accesses() {
        let mono = m(vec![Functionality::with_accesses(
            "f",
            vec![Access::read(1), Access::write(2), Access::write(1)],
        )]);
        let r = restrict_monolith(&mono, &names(&["f"]), &ids(&[1])).unwrap();
        let f = r.monolith.functionality("f").unwrap();
        assert_eq!(f.traces[0].accesses, vec![Access::read(1), Access::write(1)]);
    }

    #[test]
    fn restrict_drops_functionalities_left_empty() {
        let mono = m(vec![
            Functionality::with_accesses("f1", vec![Access::read(1)]),
            Functionality::with_accesses("f2", vec![Access::read(2)]),
        ]);
        let r = restrict_monolith(&mono, &names(&["f1", "f2"]), &ids(&[1])).unwrap();
        assert_eq!(r.dropped_functionalities, vec!["f2".to_string()]);
        assert!(r.monolith.functionality("f2").is_none());
    }

    #[test]
    fn restrict_rejects_unknown_keys() {
        let mono = m(vec![Functionality::with_accesses("f1", vec![Access::read(1)])]);
        assert!(matches!(
            restrict_monolith(&mono, &names(&["nope"]), &ids(&[1])),
            Err(Error::UnknownFunctionality(_))
        ));
        assert!(matches!(
            restrict_monolith(&mono, &names(&["f1"]), &ids(&[9])),
            Err(Error::UnknownEntity(EntityId(9)))
        ));
    }

    #[test]
    fn duplicate_functionality_names_rejected() {
        let r = Monolith::from_functionalities(vec![
            Functionality::with_accesses("f", vec![Access::read(1)]),
            Functionality::with_accesses("f", vec![Access::read(2)]),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn common_subset_intersects_names() {
        let a = m(vec![
            Functionality::with_accesses("f1", vec![Access::read(1)]),
            Functionality::with_accesses("f2", vec![Access::read(2)]),
        ]);
        let b = m(vec![
            Functionality::with_accesses("f2", vec![Access::read(2)]),
            Functionality::with_accesses("f3", vec![Access::read(3)]),
        ]);
        let c = common_subset(&a, &b);
        assert_eq!(c.functionalities, names(&["f2"]));
        assert_eq!(c.entities_in_a(), ids(&[2]));

        let same = common_subset(&a, &a);
        assert_eq!(same.functionalities, a.functionality_names());
        assert_eq!(same.entities_in_a(), a.entity_set());

        let d = m(vec![Functionality::with_accesses("g", vec![Access::read(7)])]);
        assert!(common_subset(&a, &d).functionalities.is_empty());
    }

    #[test]
    fn common_subset_matches_named_entities_by_name() {
        let fa = Functionality::with_accesses("f", vec![Access::read(1), Access::read(2)]);
        let fb = Functionality::with_accesses("f", vec![Access::read(10), Access::read(2)]);
        let a = Monolith::new(
            vec![fa],
            [(EntityId(1), Some("Book".into())), (EntityId(2), Some("Page".into()))].into(),
        )
        .unwrap();
        let b = Monolith::new(
            vec![fb],
            [(EntityId(10), Some("Book".into())), (EntityId(2), Some("Author".into()))].into(),
        )
        .unwrap();
        let c = common_subset(&a, &b);
        assert_eq!(c.entity_pairs, vec![(EntityId(1), EntityId(10))]);
    }
}
