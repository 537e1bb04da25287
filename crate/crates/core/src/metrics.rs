//! Local transactions, remote invocations and the redesign-complexity metric.
//!
//! A trace is split into maximal runs of accesses whose entities share a
//! cluster (local transactions). The complexity of a local transaction counts
//! the *other* distributed functionalities that access, in the inverse mode,
//! something the transaction reads or writes after pruning. A functionality
//! scores the sum over the local transactions of each trace, aggregated over
//! traces; traces that stay in one local transaction score 0 unless strict
//! summation is requested.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::clustering::kebab_enum;
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::model::{Access, EntityId, Functionality, Mode, Monolith, Trace};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTransaction {
    pub functionality: String,
    pub trace_id: u64,
    pub cluster: String,
    pub accesses: Vec<Access>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RemoteInvocation {
    pub from: Access,
    pub to: Access,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TracePartition {
    pub local_transactions: Vec<LocalTransaction>,
    pub remote_invocations: Vec<RemoteInvocation>,
}

/// Maximal same-cluster runs as `(cluster, start, end)`.
fn runs<F>(accesses: &[Access], mut cluster_of: F) -> Result<Vec<(usize, usize, usize)>>
where
    F: FnMut(EntityId) -> Option<usize>,
{
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    let mut missing = BTreeSet::new();
    for (pos, a) in accesses.iter().enumerate() {
        let Some(c) = cluster_of(a.entity) else {
            missing.insert(a.entity);
            continue;
        };
        match out.last_mut() {
            Some(last) if last.0 == c && last.2 == pos => last.2 = pos + 1,
            _ => out.push((c, pos, pos + 1)),
        }
    }
    if !missing.is_empty() {
        return Err(Error::UnassignedEntity(missing.into_iter().collect()));
    }
    Ok(out)
}

/// Splits a trace at every adjacent pair whose entities lie in different clusters.
pub fn partition_trace(functionality: &str, t: &Trace, d: &Decomposition) -> Result<TracePartition> {
    let assignment = d.assignment();
    let names: Vec<&String> = d.clusters().keys().collect();
    let runs = runs(&t.accesses, |e| assignment.get(&e).copied())?;
    let local_transactions = runs
        .iter()
        .map(|&(c, start, end)| LocalTransaction {
            functionality: functionality.to_string(),
            trace_id: t.id,
            cluster: names[c].clone(),
            accesses: t.accesses[start..end].to_vec(),
        })
        .collect();
    let remote_invocations = runs
        .windows(2)
        .map(|w| RemoteInvocation { from: t.accesses[w[0].2 - 1], to: t.accesses[w[1].1] })
        .collect();
    Ok(TracePartition { local_transactions, remote_invocations })
}

/// The externally visible accesses of a local transaction: at most one read
/// and one write per entity, keeping the read only when it happens before the
/// first write.
pub fn prune(accesses: &[Access]) -> BTreeSet<Access> {
    let mut out = BTreeSet::new();
    let mut written = BTreeSet::new();
    for a in accesses {
        match a.mode {
            Mode::Write => {
                written.insert(a.entity);
                out.insert(*a);
            }
            Mode::Read if !written.contains(&a.entity) => {
                out.insert(*a);
            }
            Mode::Read => {}
        }
    }
    out
}

/// True when any trace of `f` spans two or more local transactions.
pub fn is_distributed(f: &Functionality, d: &Decomposition) -> Result<bool> {
    let assignment = d.assignment();
    let mut distributed = false;
    for t in &f.traces {
        distributed |= runs(&t.accesses, |e| assignment.get(&e).copied())?.len() > 1;
    }
    Ok(distributed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceAggregation {
    #[default]
    Mean,
    Max,
}

kebab_enum!(TraceAggregation { Mean => "mean", Max => "max" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ComplexityConfig {
    pub aggregation: TraceAggregation,
    /// Score single-transaction traces too, as the bare summation would.
    pub strict_summation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalityComplexity<T> {
    pub traces: usize,
    pub mean_local_transactions: T,
    pub complexity: T,
    pub distributed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport<T> {
    pub functionalities: BTreeMap<String, FunctionalityComplexity<T>>,
    pub total: T,
    pub max_complexity: T,
    /// `total / max_complexity`, or 0 when the maximum is 0. Not clamped.
    pub uniform: T,
}

impl<T: Scalar> ComplexityReport<T> {
    pub fn per_functionality(&self) -> BTreeMap<&str, T> {
        self.functionalities.iter().map(|(k, v)| (k.as_str(), v.complexity)).collect()
    }

    /// Complexity above the singleton-decomposition maximum.
    pub fn exceeds_max(&self) -> bool {
        self.uniform > T::one()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let per: serde_json::Map<String, serde_json::Value> = self
            .functionalities
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v.complexity.as_f64())))
            .collect();
        serde_json::json!({
            "perFunctionality": per,
            "total": self.total.as_f64(),
            "maxComplexity": self.max_complexity.as_f64(),
            "uniform": self.uniform.as_f64(),
        })
    }

    /// One row per functionality, 6 decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("functionality,traces,meanLocalTransactions,complexity\n");
        for (name, f) in &self.functionalities {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6}",
                csv_field(name),
                f.traces,
                f.mean_local_transactions.as_f64(),
                f.complexity.as_f64()
            );
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Dense per-monolith view reused across decompositions; caches the
/// singleton-decomposition maximum.
pub struct ComplexityEngine<'m, T> {
    monolith: &'m Monolith,
    config: ComplexityConfig,
    entity_index: HashMap<EntityId, usize>,
    entities: Vec<EntityId>,
    // per functionality, per trace: dense (entity index, mode) accesses
    traces: Vec<Vec<Vec<(usize, Mode)>>>,
    max: OnceLock<T>,
}

fn key(entity: usize, mode: Mode) -> usize {
    entity * 2 + (mode == Mode::Write) as usize
}

impl<'m, T: Scalar> ComplexityEngine<'m, T> {
    pub fn new(monolith: &'m Monolith, config: ComplexityConfig) -> Self {
        let entities = monolith.entity_ids();
        let entity_index: HashMap<EntityId, usize> =
            entities.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let traces = monolith
            .functionalities()
            .map(|f| {
                f.traces
                    .iter()
                    .map(|t| t.accesses.iter().map(|a| (entity_index[&a.entity], a.mode)).collect())
                    .collect()
            })
            .collect();
        ComplexityEngine { monolith, config, entity_index, entities, traces, max: OnceLock::new() }
    }

    pub fn monolith(&self) -> &Monolith {
        self.monolith
    }

    pub fn config(&self) -> ComplexityConfig {
        self.config
    }

    fn cluster_lookup(&self, d: &Decomposition) -> Result<Vec<usize>> {
        let mut lookup = vec![usize::MAX; self.entities.len()];
        for (ci, members) in d.clusters().values().enumerate() {
            for e in members {
                if let Some(&i) = self.entity_index.get(e) {
                    lookup[i] = ci;
                }
            }
        }
        let mut used = vec![false; self.entities.len()];
        for &(e, _) in self.traces.iter().flatten().flatten() {
            used[e] = true;
        }
        let missing: Vec<EntityId> = (0..self.entities.len())
            .filter(|&i| used[i] && lookup[i] == usize::MAX)
            .map(|i| self.entities[i])
            .collect();
        if missing.is_empty() {
            Ok(lookup)
        } else {
            Err(Error::UnassignedEntity(missing))
        }
    }

    /// Scores every functionality under `d`.
    pub fn functionality_scores(&self, d: &Decomposition) -> Result<Vec<FunctionalityComplexity<T>>> {
        let cluster = self.cluster_lookup(d)?;
        let n_keys = self.entities.len() * 2;

        // pruned key sets per local transaction, per trace, per functionality
        let mut pruned: Vec<Vec<Vec<Vec<usize>>>> = Vec::with_capacity(self.traces.len());
        let mut distributed = vec![false; self.traces.len()];
        for (fi, traces) in self.traces.iter().enumerate() {
            let mut per_trace = Vec::with_capacity(traces.len());
            for t in traces {
                let mut lts: Vec<Vec<usize>> = Vec::new();
                let mut start = 0;
                while start < t.len() {
                    let c = cluster[t[start].0];
                    let mut end = start + 1;
                    while end < t.len() && cluster[t[end].0] == c {
                        end += 1;
                    }
                    lts.push(prune_dense(&t[start..end]));
                    start = end;
                }
                distributed[fi] |= lts.len() > 1;
                per_trace.push(lts);
            }
            pruned.push(per_trace);
        }

        // holders[k]: distributed functionalities whose pruned accesses contain k
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n_keys];
        for (fi, per_trace) in pruned.iter().enumerate() {
            if !distributed[fi] {
                continue;
            }
            let mut keys: Vec<usize> = per_trace.iter().flatten().flatten().copied().collect();
            keys.sort_unstable();
            keys.dedup();
            for k in keys {
                holders[k].push(fi);
            }
        }

        let mut stamp = vec![0usize; self.traces.len()];
        let mut generation = 0usize;
        let mut out = Vec::with_capacity(self.traces.len());
        for (fi, per_trace) in pruned.iter().enumerate() {
            let mut trace_scores = Vec::with_capacity(per_trace.len());
            let mut lt_total = 0usize;
            for lts in per_trace {
                lt_total += lts.len();
                if lts.len() <= 1 && !self.config.strict_summation {
                    trace_scores.push(0usize);
                    continue;
                }
                let mut score = 0usize;
                for lt in lts {
                    generation += 1;
                    for &k in lt {
                        for &other in &holders[k ^ 1] {
                            if other != fi && stamp[other] != generation {
                                stamp[other] = generation;
                                score += 1;
                            }
                        }
                    }
                }
                trace_scores.push(score);
            }
            let n_traces = trace_scores.len();
            let complexity = match (n_traces, self.config.aggregation) {
                (0, _) => T::zero(),
                (_, TraceAggregation::Mean) => {
                    T::from_count(trace_scores.iter().sum()) / T::from_count(n_traces)
                }
                (_, TraceAggregation::Max) => T::from_count(trace_scores.iter().copied().max().unwrap_or(0)),
            };
            let mean_local_transactions = if n_traces == 0 {
                T::zero()
            } else {
                T::from_count(lt_total) / T::from_count(n_traces)
            };
            out.push(FunctionalityComplexity {
                traces: n_traces,
                mean_local_transactions,
                complexity,
                distributed: distributed[fi],
            });
        }
        Ok(out)
    }

    /// Sum of functionality complexities under `d`.
    pub fn total(&self, d: &Decomposition) -> Result<T> {
        Ok(self
            .functionality_scores(d)?
            .iter()
            .fold(T::zero(), |acc, f| acc + f.complexity))
    }

    /// Total complexity of the decomposition with one entity per cluster.
    pub fn max_complexity(&self) -> T {
        *self.max.get_or_init(|| {
            self.total(&Decomposition::singletons(self.entities.iter().copied()))
                .expect("singleton decomposition assigns every entity")
        })
    }

    pub fn uniform(&self, d: &Decomposition) -> Result<T> {
        Ok(uniform_of(self.total(d)?, self.max_complexity()))
    }

    pub fn report(&self, d: &Decomposition) -> Result<ComplexityReport<T>> {
        let scores = self.functionality_scores(d)?;
        let total = scores.iter().fold(T::zero(), |acc, f| acc + f.complexity);
        let max_complexity = self.max_complexity();
        let functionalities = self
            .monolith
            .functionalities()
            .map(|f| f.name.clone())
            .zip(scores)
            .collect();
        Ok(ComplexityReport { functionalities, total, max_complexity, uniform: uniform_of(total, max_complexity) })
    }
}

fn uniform_of<T: Scalar>(total: T, max: T) -> T {
    if max > T::zero() {
        total / max
    } else {
        T::zero()
    }
}

fn prune_dense(accesses: &[(usize, Mode)]) -> Vec<usize> {
    let mut keys: Vec<usize> = Vec::with_capacity(accesses.len());
    for (i, &(e, mode)) in accesses.iter().enumerate() {
        let keep = match mode {
            Mode::Write => true,
            Mode::Read => !accesses[..i].iter().any(|&(e2, m2)| e2 == e && m2 == Mode::Write),
        };
        if keep {
            keys.push(key(e, mode));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    keys
}

pub fn functionality_complexity<T: Scalar>(
    f: &Functionality,
    d: &Decomposition,
    m: &Monolith,
    config: ComplexityConfig,
) -> Result<T> {
    let position = m
        .functionalities()
        .position(|g| g.name == f.name)
        .ok_or_else(|| Error::UnknownFunctionality(f.name.clone()))?;
    let engine = ComplexityEngine::<T>::new(m, config);
    Ok(engine.functionality_scores(d)?[position].complexity)
}

pub fn system_complexity<T: Scalar>(
    m: &Monolith,
    d: &Decomposition,
    config: ComplexityConfig,
) -> Result<ComplexityReport<T>> {
    ComplexityEngine::new(m, config).report(d)
}

pub fn max_complexity<T: Scalar>(m: &Monolith, config: ComplexityConfig) -> T {
    ComplexityEngine::new(m, config).max_complexity()
}
