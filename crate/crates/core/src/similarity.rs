//! Entity similarity measures: access, read, write and sequence, and their
//! weighted combination.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EntityId, Mode, Monolith};
use crate::scalar::Scalar;

/// For every entity, the functionalities whose traces access it, overall and
/// per mode. Sets union over all traces of a functionality.
#[derive(Debug, Clone)]
pub struct AccessIndex {
    entities: Vec<EntityId>,
    position: HashMap<EntityId, usize>,
    functionalities: Vec<String>,
    by_entity: Vec<BTreeSet<usize>>,
    by_read: Vec<BTreeSet<usize>>,
    by_write: Vec<BTreeSet<usize>>,
}

pub fn build_access_index(m: &Monolith) -> AccessIndex {
    let entities = m.entity_ids();
    let position: HashMap<EntityId, usize> =
        entities.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let n = entities.len();
    let mut by_entity = vec![BTreeSet::new(); n];
    let mut by_read = vec![BTreeSet::new(); n];
    let mut by_write = vec![BTreeSet::new(); n];
    let mut functionalities = Vec::with_capacity(m.num_functionalities());

    for (fi, f) in m.functionalities().enumerate() {
        functionalities.push(f.name.clone());
        for a in f.traces.iter().flat_map(|t| &t.accesses) {
            let ei = position[&a.entity];
            by_entity[ei].insert(fi);
            match a.mode {
                Mode::Read => by_read[ei].insert(fi),
                Mode::Write => by_write[ei].insert(fi),
            };
        }
    }
    AccessIndex { entities, position, functionalities, by_entity, by_read, by_write }
}

impl AccessIndex {
    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    fn index_of(&self, e: EntityId) -> Result<usize> {
        self.position.get(&e).copied().ok_or(Error::UnknownEntity(e))
    }

    fn names(&self, set: &BTreeSet<usize>) -> BTreeSet<&str> {
        set.iter().map(|&i| self.functionalities[i].as_str()).collect()
    }

    /// `funct(e)`.
    pub fn funct(&self, e: EntityId) -> Result<BTreeSet<&str>> {
        Ok(self.names(&self.by_entity[self.index_of(e)?]))
    }

    /// `funct(e, mode)`.
    pub fn funct_mode(&self, e: EntityId, mode: Mode) -> Result<BTreeSet<&str>> {
        let i = self.index_of(e)?;
        Ok(self.names(match mode {
            Mode::Read => &self.by_read[i],
            Mode::Write => &self.by_write[i],
        }))
    }

    fn sets(&self, kind: SetKind) -> &[BTreeSet<usize>] {
        match kind {
            SetKind::Any => &self.by_entity,
            SetKind::Read => &self.by_read,
            SetKind::Write => &self.by_write,
        }
    }

    fn ratio<T: Scalar>(&self, kind: SetKind, e1: EntityId, e2: EntityId) -> Result<T> {
        let sets = self.sets(kind);
        let (a, b) = (&sets[self.index_of(e1)?], &sets[self.index_of(e2)?]);
        Ok(overlap_ratio(a, b))
    }

    fn matrix<T: Scalar>(&self, kind: SetKind) -> SimilarityMatrix<T> {
        let sets = self.sets(kind);
        let n = self.entities.len();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(if i == j { T::one() } else { overlap_ratio(&sets[i], &sets[j]) });
            }
        }
        SimilarityMatrix { entities: self.entities.clone(), values }
    }
}

#[derive(Clone, Copy)]
enum SetKind {
    Any,
    Read,
    Write,
}

/// `#(a ∩ b) / #a`, or 0 when `a` is empty.
fn overlap_ratio<T: Scalar>(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    T::from_count(a.intersection(b).count()) / T::from_count(a.len())
}

pub fn sm_access<T: Scalar>(idx: &AccessIndex, e1: EntityId, e2: EntityId) -> Result<T> {
    idx.ratio(SetKind::Any, e1, e2)
}

pub fn sm_read<T: Scalar>(idx: &AccessIndex, e1: EntityId, e2: EntityId) -> Result<T> {
    idx.ratio(SetKind::Read, e1, e2)
}

pub fn sm_write<T: Scalar>(idx: &AccessIndex, e1: EntityId, e2: EntityId) -> Result<T> {
    idx.ratio(SetKind::Write, e1, e2)
}

pub fn sm_access_matrix<T: Scalar>(idx: &AccessIndex) -> SimilarityMatrix<T> {
    idx.matrix(SetKind::Any)
}

pub fn sm_read_matrix<T: Scalar>(idx: &AccessIndex) -> SimilarityMatrix<T> {
    idx.matrix(SetKind::Read)
}

pub fn sm_write_matrix<T: Scalar>(idx: &AccessIndex) -> SimilarityMatrix<T> {
    idx.matrix(SetKind::Write)
}

/// Number of adjacent positions, over all traces, whose entities are
/// `{e1, e2}` in either order. Self-adjacency is not counted.
pub fn sum_pairs(m: &Monolith) -> (Vec<EntityId>, Vec<usize>) {
    let entities = m.entity_ids();
    let position: HashMap<EntityId, usize> =
        entities.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let n = entities.len();
    let mut counts = vec![0usize; n * n];
    for (_, t) in m.traces() {
        for w in t.accesses.windows(2) {
            let (i, j) = (position[&w[0].entity], position[&w[1].entity]);
            if i != j {
                counts[i * n + j] += 1;
                counts[j * n + i] += 1;
            }
        }
    }
    (entities, counts)
}

/// `sumPairs / maxPairs`; all zeros off the diagonal when no pair is adjacent.
pub fn sm_sequence_matrix<T: Scalar>(m: &Monolith) -> SimilarityMatrix<T> {
    let (entities, counts) = sum_pairs(m);
    let n = entities.len();
    let max_pairs = counts.iter().copied().max().unwrap_or(0);
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(if i == j {
                T::one()
            } else if max_pairs == 0 {
                T::zero()
            } else {
                T::from_count(counts[i * n + j]) / T::from_count(max_pairs)
            });
        }
    }
    SimilarityMatrix { entities, values }
}

/// Dense `|E| × |E|` matrix with values in `[0, 1]` and a unit diagonal.
/// Not necessarily symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    entities: Vec<EntityId>,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    /// Builds a matrix from row-major values.
    pub fn from_rows(entities: Vec<EntityId>, values: Vec<T>) -> Result<Self> {
        let n = entities.len();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {n} entities",
                values.len()
            )));
        }
        Ok(SimilarityMatrix { entities, values })
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn size(&self) -> usize {
        self.entities.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.size();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, e1: EntityId, e2: EntityId) -> Result<T> {
        let find = |e: EntityId| {
            self.entities
                .iter()
                .position(|x| *x == e)
                .ok_or(Error::UnknownEntity(e))
        };
        Ok(self.get(find(e1)?, find(e2)?))
    }

    /// CSV with a header row and column of entity ids, 6 decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("entity");
        for e in &self.entities {
            let _ = write!(out, ",{e}");
        }
        out.push('\n');
        for (i, e) in self.entities.iter().enumerate() {
            let _ = write!(out, "{e}");
            for v in self.row(i) {
                let _ = write!(out, ",{:.6}", v.as_f64());
            }
            out.push('\n');
        }
        out
    }
}

/// Percent weights of the four measures, in (access, write, read, sequence)
/// order. The derived ordering is lexicographic in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Weights {
    pub access: u32,
    pub write: u32,
    pub read: u32,
    pub sequence: u32,
}

impl Weights {
    pub const fn new(access: u32, write: u32, read: u32, sequence: u32) -> Self {
        Weights { access, write, read, sequence }
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.access, self.write, self.read, self.sequence]
    }

    pub fn sum(&self) -> u32 {
        self.as_array().iter().sum()
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.access, self.write, self.read, self.sequence)
    }
}

/// Accepts weights whose components are multiples of `step` summing to 100.
pub fn validate_weights(w: &Weights, step: u32) -> Result<()> {
    if step == 0 || 100 % step != 0 {
        return Err(Error::InvalidStep(step));
    }
    if w.as_array().iter().any(|c| c % step != 0) {
        return Err(Error::WeightGrid { weights: *w, step });
    }
    if w.sum() != 100 {
        return Err(Error::WeightSum(*w));
    }
    Ok(())
}

/// The four base matrices over a shared entity order.
#[derive(Debug, Clone)]
pub struct SimilarityMeasures<T> {
    pub access: SimilarityMatrix<T>,
    pub write: SimilarityMatrix<T>,
    pub read: SimilarityMatrix<T>,
    pub sequence: SimilarityMatrix<T>,
}

impl<T: Scalar> SimilarityMeasures<T> {
    pub fn compute(m: &Monolith) -> Self {
        let idx = build_access_index(m);
        SimilarityMeasures {
            access: sm_access_matrix(&idx),
            write: sm_write_matrix(&idx),
            read: sm_read_matrix(&idx),
            sequence: sm_sequence_matrix(m),
        }
    }

    pub fn entities(&self) -> &[EntityId] {
        self.access.entities()
    }
}

/// `(wA·A + wW·W + wR·R + wS·S) / 100`, elementwise.
pub fn combine<T: Scalar>(measures: &SimilarityMeasures<T>, w: &Weights) -> Result<SimilarityMatrix<T>> {
    validate_weights(w, 1)?;
    let parts = [
        (&measures.access, w.access),
        (&measures.write, w.write),
        (&measures.read, w.read),
        (&measures.sequence, w.sequence),
    ];
    let entities = measures.access.entities.clone();
    for (m, _) in &parts {
        if m.entities != entities || m.values.len() != measures.access.values.len() {
            return Err(Error::DimensionMismatch("similarity matrices disagree on entity order".into()));
        }
    }
    let hundred = T::from_count(100);
    let weights: Vec<T> = parts.iter().map(|(_, w)| T::from_count(*w as usize)).collect();
    let values = (0..measures.access.values.len())
        .map(|k| {
            let mut acc = T::zero();
            for ((m, _), wt) in parts.iter().zip(&weights) {
                acc = acc + *wt * m.values[k];
            }
            acc / hundred
        })
        .collect();
    Ok(SimilarityMatrix { entities, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Access, Functionality};
    use num_rational::Rational64;

    fn e(i: i64) -> EntityId {
        EntityId(i)
    }

    pub(crate) fn running_example() -> Monolith {
        Monolith::from_functionalities(vec![
            Functionality::with_accesses("f1", vec![Access::read(1), Access::write(2)]),
            Functionality::with_accesses("f2", vec![Access::read(2), Access::write(3)]),
            Functionality::with_accesses("f3", vec![Access::read(1), Access::write(1)]),
        ])
        .unwrap()
    }

    #[test]
    fn access_index_sets() {
        let idx = build_access_index(&running_example());
        assert_eq!(idx.funct(e(1)).unwrap(), ["f1", "f3"].into());
        assert_eq!(idx.funct_mode(e(2), Mode::Write).unwrap(), ["f1"].into());
        assert!(idx.funct_mode(e(3), Mode::Read).unwrap().is_empty());
        assert!(idx.funct(e(9)).is_err());
    }

    #[test]
    fn set_measures_on_running_example() {
        let idx = build_access_index(&running_example());
        assert_eq!(sm_access::<f64>(&idx, e(1), e(2)).unwrap(), 0.5);
        assert_eq!(sm_access::<f64>(&idx, e(3), e(2)).unwrap(), 1.0);
        assert_eq!(sm_access::<f64>(&idx, e(2), e(2)).unwrap(), 1.0);
        assert_eq!(sm_read::<f64>(&idx, e(1), e(2)).unwrap(), 0.0);
        assert_eq!(sm_write::<f64>(&idx, e(2), e(3)).unwrap(), 0.0);
        assert_eq!(sm_write::<f64>(&idx, e(1), e(1)).unwrap(), 1.0);
        // funct(e3, R) is empty
        assert_eq!(sm_read::<f64>(&idx, e(3), e(3)).unwrap(), 0.0);
        assert!(matches!(sm_access::<f64>(&idx, e(4), e(1)), Err(Error::UnknownEntity(_))));
    }

    #[test]
    fn sequence_measure() {
        let s = sm_sequence_matrix::<f64>(&running_example());
        assert_eq!(s.value(e(1), e(2)).unwrap(), 1.0);
        assert_eq!(s.value(e(2), e(3)).unwrap(), 1.0);
        assert_eq!(s.value(e(1), e(3)).unwrap(), 0.0);

        let m = Monolith::from_functionalities(vec![Functionality::with_accesses(
            "f",
            vec![Access::read(1), Access::write(2), Access::read(1)],
        )])
        .unwrap();
        let (_, counts) = sum_pairs(&m);
        assert_eq!(counts[1], 2);
        assert_eq!(sm_sequence_matrix::<f64>(&m).value(e(1), e(2)).unwrap(), 1.0);

        let singles = Monolith::from_functionalities(vec![
            Functionality::with_accesses("a", vec![Access::read(1)]),
            Functionality::with_accesses("b", vec![Access::read(2)]),
        ])
        .unwrap();
        let s = sm_sequence_matrix::<f64>(&singles);
        assert_eq!(s.value(e(1), e(2)).unwrap(), 0.0);
        assert_eq!(s.value(e(1), e(1)).unwrap(), 1.0);
    }

    #[test]
    fn weight_validation() {
        assert!(validate_weights(&Weights::new(40, 20, 20, 20), 10).is_ok());
        assert!(validate_weights(&Weights::new(30, 20, 30, 20), 10).is_ok());
        assert!(matches!(validate_weights(&Weights::new(50, 50, 10, 0), 10), Err(Error::WeightSum(_))));
        assert!(matches!(
            validate_weights(&Weights::new(25, 25, 25, 25), 10),
            Err(Error::WeightGrid { .. })
        ));
    }

    #[test]
    fn combine_projects_and_averages() {
        let ms = SimilarityMeasures::<Rational64>::compute(&running_example());
        let only_access = combine(&ms, &Weights::new(100, 0, 0, 0)).unwrap();
        assert_eq!(only_access, ms.access);

        let same = SimilarityMeasures {
            access: ms.access.clone(),
            write: ms.access.clone(),
            read: ms.access.clone(),
            sequence: ms.access.clone(),
        };
        for w in [Weights::new(30, 20, 30, 20), Weights::new(0, 0, 10, 90)] {
            assert_eq!(combine(&same, &w).unwrap(), ms.access);
        }
    }

    #[test]
    fn combine_rejects_mismatched_orders() {
        let ms = SimilarityMeasures::<f64>::compute(&running_example());
        let mut bad = ms.clone();
        bad.sequence = SimilarityMatrix::from_rows(vec![e(1)], vec![1.0]).unwrap();
        assert!(matches!(
            combine(&bad, &Weights::new(25, 25, 25, 25)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn csv_dump_has_header_and_six_decimals() {
        let csv = sm_access_matrix::<f64>(&build_access_index(&running_example())).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("entity,1,2,3"));
        assert_eq!(lines.next(), Some("1,1.000000,0.500000,0.000000"));
    }
}
