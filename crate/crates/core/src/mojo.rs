//! MoJo move/join distance between decompositions and the MoJoFM percentage.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::clustering::kebab_enum;
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::metrics::csv_field;
use crate::model::EntityId;

/// Universes up to this size get their maximum distance by enumeration.
pub const ENUMERATION_LIMIT: usize = 12;
/// Largest universe the breadth-first oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignStrategy {
    /// Missing entities join the other side's largest cluster.
    #[default]
    BiggestCluster,
    /// Both sides keep only the shared entities.
    DropUncommon,
}

kebab_enum!(AlignStrategy { BiggestCluster => "biggest-cluster", DropUncommon => "drop-uncommon" });

/// Which argument of [`mojofm_with_reference`] is the reference decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSide {
    First,
    #[default]
    Second,
}

kebab_enum!(ReferenceSide { First => "first", Second => "second" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxMnoMethod {
    Enumeration,
    Constructive,
}

kebab_enum!(MaxMnoMethod { Enumeration => "enumeration", Constructive => "constructive" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MojoResult {
    pub mno: usize,
    pub max_mno: usize,
    pub mojo_fm: f64,
    pub max_method: MaxMnoMethod,
}

impl MojoResult {
    /// MoJoFM with two decimals, rounded half-up on exact integers.
    pub fn formatted(&self) -> String {
        format_percentage(self.max_mno - self.mno, self.max_mno)
    }
}

impl fmt::Display for MojoResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mno {} maxMno {} MoJoFM {}", self.mno, self.max_mno, self.formatted())
    }
}

/// `100 * num / den` with two decimals, half-up.
pub fn format_percentage(num: usize, den: usize) -> String {
    assert!(den > 0, "percentage of zero");
    let hundredths = (20_000 * num as u128 + den as u128) / (2 * den as u128);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

fn biggest_cluster(d: &Decomposition) -> Option<&str> {
    // BTreeMap iterates names ascending, so the first maximum wins ties
    let mut best: Option<(&str, usize)> = None;
    for (name, members) in d.clusters() {
        if best.map_or(true, |(_, size)| members.len() > size) {
            best = Some((name, members.len()));
        }
    }
    best.map(|(name, _)| name)
}

fn absorb_missing(d: &Decomposition, universe: &BTreeSet<EntityId>) -> Result<Decomposition> {
    let missing: Vec<EntityId> = universe.difference(&d.universe()).copied().collect();
    if missing.is_empty() {
        return Ok(d.clone());
    }
    let mut clusters = d.clusters().clone();
    let target = biggest_cluster(d).unwrap_or("c0").to_string();
    clusters.entry(target).or_default().extend(missing);
    Decomposition::new(clusters)
}

fn restrict(d: &Decomposition, keep: &BTreeSet<EntityId>) -> Result<Decomposition> {
    let clusters = d
        .clusters()
        .iter()
        .map(|(name, members)| (name.clone(), members.intersection(keep).copied().collect::<BTreeSet<_>>()))
        .filter(|(_, members)| !members.is_empty())
        .collect();
    Decomposition::new(clusters)
}

/// Makes both decompositions cover the same entities.
pub fn align_universes(
    a: &Decomposition,
    b: &Decomposition,
    strategy: AlignStrategy,
) -> Result<(Decomposition, Decomposition)> {
    let (ua, ub) = (a.universe(), b.universe());
    match strategy {
        AlignStrategy::BiggestCluster => {
            let all: BTreeSet<EntityId> = ua.union(&ub).copied().collect();
            Ok((absorb_missing(a, &all)?, absorb_missing(b, &all)?))
        }
        AlignStrategy::DropUncommon => {
            let common: BTreeSet<EntityId> = ua.intersection(&ub).copied().collect();
            if common.is_empty() {
                return Err(Error::EmptyIntersection);
            }
            Ok((restrict(a, &common)?, restrict(b, &common)?))
        }
    }
}

fn same_universe(a: &Decomposition, b: &Decomposition) -> Result<BTreeSet<EntityId>> {
    let u = a.universe();
    if u != b.universe() {
        return Err(Error::UniverseMismatch);
    }
    Ok(u)
}

/// Maximum bipartite matching by augmenting paths.
fn matching_size(adjacency: &[Vec<usize>], right: usize) -> usize {
    fn augment(i: usize, adjacency: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adjacency[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].map_or(true, |k| augment(k, adjacency, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    let mut size = 0;
    for i in 0..adjacency.len() {
        let mut seen = vec![false; right];
        if augment(i, adjacency, &mut seen, &mut owner) {
            size += 1;
        }
    }
    size
}

/// Minimum number of Move and Join operations turning `a` into `b`.
///
/// Each cluster of `a` is tagged with a `b` cluster holding the most of its
/// entities; moves fix the untagged entities and joins merge clusters sharing
/// a tag. Choosing tags by maximum matching minimises the joins.
pub fn mojo_distance(a: &Decomposition, b: &Decomposition) -> Result<usize> {
    let universe = same_universe(a, b)?;
    let b_index: HashMap<EntityId, usize> = b.assignment();
    let kb = b.num_clusters();
    let mut retained = 0;
    let mut adjacency = Vec::with_capacity(a.num_clusters());
    for members in a.clusters().values() {
        let mut counts = vec![0usize; kb];
        for e in members {
            counts[b_index[e]] += 1;
        }
        let best = counts.iter().copied().max().unwrap_or(0);
        retained += best;
        adjacency.push((0..kb).filter(|&j| counts[j] == best).collect::<Vec<_>>());
    }
    let moves = universe.len() - retained;
    let joins = a.num_clusters() - matching_size(&adjacency, kb);
    Ok(moves + joins)
}

/// Canonical labels: entity positions to cluster numbers in first-seen order.
fn canonical(labels: &[u8]) -> Vec<u8> {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    labels
        .iter()
        .map(|&l| {
            if map[l as usize] == u8::MAX {
                map[l as usize] = next;
                next += 1;
            }
            map[l as usize]
        })
        .collect()
}

fn labels_of(d: &Decomposition, order: &[EntityId]) -> Vec<u8> {
    let assignment = d.assignment();
    canonical(&order.iter().map(|e| assignment[e] as u8).collect::<Vec<_>>())
}

/// Breadth-first search over partitions under single Move and Join steps.
pub fn brute_force_mno(a: &Decomposition, b: &Decomposition) -> Result<usize> {
    let universe = same_universe(a, b)?;
    if universe.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::UniverseTooLarge { size: universe.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let order: Vec<EntityId> = universe.into_iter().collect();
    let start = labels_of(a, &order);
    let goal = labels_of(b, &order);
    let mut seen: HashSet<Vec<u8>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, dist)) = queue.pop_front() {
        if state == goal {
            return Ok(dist);
        }
        let k = state.iter().copied().max().map_or(0, |m| m + 1);
        let mut next_states = Vec::new();
        for pos in 0..state.len() {
            for target in 0..=k {
                if target != state[pos] {
                    let mut s = state.clone();
                    s[pos] = target;
                    next_states.push(s);
                }
            }
        }
        for x in 0..k {
            for y in x + 1..k {
                next_states.push(state.iter().map(|&l| if l == y { x } else { l }).collect());
            }
        }
        for s in next_states {
            let s = canonical(&s);
            if seen.insert(s.clone()) {
                queue.push_back((s, dist + 1));
            }
        }
    }
    unreachable!("every partition reaches every other by moves")
}

/// Enumerates every partition of `b`'s universe and keeps the largest distance.
pub fn max_mojo_by_enumeration(b: &Decomposition) -> Result<usize> {
    let n = b.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::UniverseTooLarge { size: n, limit: ENUMERATION_LIMIT });
    }
    let order: Vec<EntityId> = b.universe().into_iter().collect();
    let mut search = Enumeration {
        b_labels: labels_of(b, &order),
        kb: b.num_clusters(),
        counts: [[0; ENUMERATION_LIMIT]; ENUMERATION_LIMIT],
        best: 0,
    };
    search.fill(0, 0);
    Ok(search.best)
}

struct Enumeration {
    b_labels: Vec<u8>,
    kb: usize,
    counts: [[u8; ENUMERATION_LIMIT]; ENUMERATION_LIMIT],
    best: usize,
}

impl Enumeration {
    fn fill(&mut self, pos: usize, used: usize) {
        if pos == self.b_labels.len() {
            self.best = self.best.max(self.distance(used));
            return;
        }
        let col = self.b_labels[pos] as usize;
        for label in 0..=used.min(ENUMERATION_LIMIT - 1) {
            self.counts[label][col] += 1;
            self.fill(pos + 1, used.max(label + 1));
            self.counts[label][col] -= 1;
        }
    }

    fn distance(&self, la: usize) -> usize {
        let mut adjacency = [0u16; ENUMERATION_LIMIT];
        let mut retained = 0;
        for i in 0..la {
            let row = &self.counts[i][..self.kb];
            let best = *row.iter().max().unwrap_or(&0);
            retained += best as usize;
            for (j, &c) in row.iter().enumerate() {
                if c == best {
                    adjacency[i] |= 1 << j;
                }
            }
        }
        let mut owner = [u8::MAX; ENUMERATION_LIMIT];
        let mut matched = 0;
        for i in 0..la {
            if augment_mask(i, &adjacency, &mut 0, &mut owner) {
                matched += 1;
            }
        }
        self.b_labels.len() - retained + la - matched
    }
}

fn augment_mask(i: usize, adjacency: &[u16], seen: &mut u16, owner: &mut [u8]) -> bool {
    let mut open = adjacency[i] & !*seen;
    while open != 0 {
        let j = open.trailing_zeros() as usize;
        open &= open - 1;
        *seen |= 1 << j;
        if owner[j] == u8::MAX || augment_mask(owner[j] as usize, adjacency, seen, owner) {
            owner[j] = i as u8;
            return true;
        }
    }
    false
}

/// Closed form over `b`'s cluster sizes `s1 >= s2 >= ... >= sm`:
/// `n - min over q in 0..=m of (q + s(q+1))`, with `s(m+1) = 0`.
///
/// The witness keeps `q` clusters of size one per large `b` cluster while
/// scattering the rest, so no tag retains more than one entity per cluster.
pub fn max_mojo_constructive(b: &Decomposition) -> usize {
    let mut sizes: Vec<usize> = b.clusters().values().map(BTreeSet::len).collect();
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    let floor = (0..=sizes.len())
        .map(|q| q + sizes.get(q).copied().unwrap_or(0))
        .min()
        .unwrap_or(0);
    b.len() - floor
}

/// Largest MoJo distance from any partition of `b`'s universe to `b`.
pub fn max_mojo_distance(b: &Decomposition) -> Result<(usize, MaxMnoMethod)> {
    if b.len() < 2 {
        return Err(Error::SingletonUniverse);
    }
    if b.len() <= ENUMERATION_LIMIT {
        Ok((max_mojo_by_enumeration(b)?, MaxMnoMethod::Enumeration))
    } else {
        Ok((max_mojo_constructive(b), MaxMnoMethod::Constructive))
    }
}

/// MoJoFM of `a` against the reference `b`.
pub fn mojofm(a: &Decomposition, b: &Decomposition) -> Result<MojoResult> {
    same_universe(a, b)?;
    let (max_mno, max_method) = max_mojo_distance(b)?;
    let mno = mojo_distance(a, b)?;
    let mojo_fm = (1.0 - mno as f64 / max_mno as f64) * 100.0;
    Ok(MojoResult { mno, max_mno, mojo_fm, max_method })
}

pub fn mojofm_with_reference(a: &Decomposition, b: &Decomposition, reference: ReferenceSide) -> Result<MojoResult> {
    match reference {
        ReferenceSide::Second => mojofm(a, b),
        ReferenceSide::First => mojofm(b, a),
    }
}

/// One row of a generated-versus-reference comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRow {
    pub n_clusters: usize,
    pub source: String,
    pub result: MojoResult,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("nClusters,source,mno,maxMno,mojoFm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n_clusters,
            csv_field(&r.source),
            r.result.mno,
            r.result.max_mno,
            r.result.formatted()
        );
    }
    out
}

/// Mean MoJoFM per source.
pub fn average_by_source(rows: &[ComparisonRow]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let slot = acc.entry(r.source.clone()).or_default();
        slot.0 += r.result.mojo_fm;
        slot.1 += 1;
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}
