//! Seeded random inputs and slow reference implementations shared by the
//! integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use monodecomp::metrics::TraceAggregation;
use monodecomp::{Access, Decomposition, EntityId, Functionality, Mode, Monolith, Rational64, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape bounds for [`random_monolith`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_entities: usize,
    pub max_functionalities: usize,
    pub max_traces: usize,
    pub max_accesses: usize,
}

pub fn random_monolith(rng: &mut ChaCha8Rng, shape: Shape) -> Monolith {
    let n_entities = rng.random_range(1..=shape.max_entities) as i64;
    let n_functionalities = rng.random_range(1..=shape.max_functionalities);
    let functionalities = (0..n_functionalities).map(|j| {
        let traces = (0..rng.random_range(1..=shape.max_traces))
            .map(|t| {
                let accesses = (0..rng.random_range(1..=shape.max_accesses))
                    .map(|_| {
                        let mode = if rng.random_bool(0.5) { Mode::Write } else { Mode::Read };
                        Access::new(EntityId(rng.random_range(1..=n_entities)), mode)
                    })
                    .collect();
                Trace::new(t as u64, accesses)
            })
            .collect();
        Functionality::new(format!("f{j}"), traces)
    });
    Monolith::from_functionalities(functionalities.collect::<Vec<_>>()).unwrap()
}

/// Uniformly random labelling of `universe` into at most `k` clusters.
pub fn random_decomposition(rng: &mut ChaCha8Rng, universe: &[EntityId]) -> Decomposition {
    let k = rng.random_range(1..=universe.len().max(1));
    let mut groups: Vec<Vec<EntityId>> = vec![Vec::new(); k];
    for &e in universe {
        groups[rng.random_range(0..k)].push(e);
    }
    Decomposition::from_groups(groups.into_iter().filter(|g| !g.is_empty())).unwrap()
}

/// Every set partition of `items`, as lists of blocks.
pub fn set_partitions(items: &[EntityId]) -> Vec<Vec<Vec<EntityId>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for p in set_partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.push(vec![first]);
        out.push(q);
    }
    out
}

/// Integer partitions of `n` as descending part lists.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            go(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Decomposition of entities `1..=n` with the given block sizes.
pub fn blocks(sizes: &[usize]) -> Decomposition {
    let mut next = 1i64;
    let groups: Vec<Vec<EntityId>> = sizes
        .iter()
        .map(|&s| {
            let g = (next..next + s as i64).map(EntityId).collect();
            next += s as i64;
            g
        })
        .collect();
    Decomposition::from_groups(groups).unwrap()
}

// Reference complexity: a literal reading of the definitions, no indexing.

pub fn oracle_local_transactions(t: &Trace, d: &Decomposition) -> Vec<Vec<Access>> {
    let mut lts: Vec<Vec<Access>> = Vec::new();
    let mut current: Option<&str> = None;
    for a in &t.accesses {
        let c = d.cluster_of(a.entity).expect("assigned entity");
        if current == Some(c) {
            lts.last_mut().unwrap().push(*a);
        } else {
            lts.push(vec![*a]);
            current = Some(c);
        }
    }
    lts
}

pub fn oracle_prune(lt: &[Access]) -> BTreeSet<Access> {
    let entities: BTreeSet<EntityId> = lt.iter().map(|a| a.entity).collect();
    let mut out = BTreeSet::new();
    for e in entities {
        let first_read = lt.iter().position(|a| a.entity == e && a.mode == Mode::Read);
        let first_write = lt.iter().position(|a| a.entity == e && a.mode == Mode::Write);
        match (first_read, first_write) {
            (Some(_), None) => {
                out.insert(Access::read(e));
            }
            (None, Some(_)) => {
                out.insert(Access::write(e));
            }
            (Some(r), Some(w)) => {
                out.insert(Access::write(e));
                if r < w {
                    out.insert(Access::read(e));
                }
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub fn oracle_distributed(f: &Functionality, d: &Decomposition) -> bool {
    f.traces.iter().any(|t| oracle_local_transactions(t, d).len() >= 2)
}

pub fn oracle_pruned_union(f: &Functionality, d: &Decomposition) -> BTreeSet<Access> {
    f.traces
        .iter()
        .flat_map(|t| oracle_local_transactions(t, d))
        .flat_map(|lt| oracle_prune(&lt))
        .collect()
}

pub fn oracle_functionality_complexity(
    f: &Functionality,
    d: &Decomposition,
    m: &Monolith,
    strict: bool,
    aggregation: TraceAggregation,
) -> Rational64 {
    let per_trace: Vec<Rational64> = f
        .traces
        .iter()
        .map(|t| {
            let lts = oracle_local_transactions(t, d);
            if lts.len() == 1 && !strict {
                return Rational64::from_integer(0);
            }
            let mut sum = 0i64;
            for lt in &lts {
                let pruned = oracle_prune(lt);
                let others: BTreeSet<&str> = m
                    .functionalities()
                    .filter(|fi| fi.name != f.name && oracle_distributed(fi, d))
                    .filter(|fi| {
                        let union = oracle_pruned_union(fi, d);
                        pruned.iter().any(|a| union.contains(&a.inverse()))
                    })
                    .map(|fi| fi.name.as_str())
                    .collect();
                sum += others.len() as i64;
            }
            Rational64::from_integer(sum)
        })
        .collect();
    if per_trace.is_empty() {
        return Rational64::from_integer(0);
    }
    match aggregation {
        TraceAggregation::Mean => {
            per_trace.iter().copied().sum::<Rational64>() / Rational64::from_integer(per_trace.len() as i64)
        }
        TraceAggregation::Max => per_trace.iter().copied().max().unwrap(),
    }
}

pub struct OracleReport {
    pub per_functionality: BTreeMap<String, Rational64>,
    pub total: Rational64,
    pub max: Rational64,
    pub uniform: Rational64,
}

pub fn oracle_system(m: &Monolith, d: &Decomposition, strict: bool, aggregation: TraceAggregation) -> OracleReport {
    let totals = |d: &Decomposition| -> BTreeMap<String, Rational64> {
        m.functionalities()
            .map(|f| (f.name.clone(), oracle_functionality_complexity(f, d, m, strict, aggregation)))
            .collect()
    };
    let per_functionality = totals(d);
    let total: Rational64 = per_functionality.values().copied().sum();
    let max: Rational64 = totals(&Decomposition::singletons(m.entity_ids())).values().copied().sum();
    let uniform = if max > Rational64::from_integer(0) { total / max } else { Rational64::from_integer(0) };
    OracleReport { per_functionality, total, max, uniform }
}

// Reference similarity straight from the funct sets.

pub fn funct(m: &Monolith, e: EntityId, mode: Option<Mode>) -> BTreeSet<String> {
    m.functionalities()
        .filter(|f| {
            f.traces
                .iter()
                .flat_map(|t| &t.accesses)
                .any(|a| a.entity == e && mode.map_or(true, |md| a.mode == md))
        })
        .map(|f| f.name.clone())
        .collect()
}
