use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{agglomerate, similarity_to_distance, Dendrogram, DistanceMode, Linkage};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::metrics::{ComplexityConfig, ComplexityEngine};
use crate::model::Monolith;
use crate::scalar::{Real, Scalar};
use crate::similarity::{combine, validate_weights, SimilarityMeasures, Weights};

/// Every `(access, write, read, sequence)` of multiples of `step` summing to
/// 100, in lexicographic order.
pub fn enumerate_weightings(step: u32) -> Result<Vec<Weights>> {
    if step == 0 || 100 % step != 0 {
        return Err(Error::InvalidStep(step));
    }
    let mut out = Vec::new();
    for a in (0..=100).step_by(step as usize) {
        for w in (0..=100 - a).step_by(step as usize) {
            for r in (0..=100 - a - w).step_by(step as usize) {
                out.push(Weights::new(a, w, r, 100 - a - w - r));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepConfig {
    pub n_range: RangeInclusive<usize>,
    pub step: u32,
    pub distance: DistanceMode,
    pub linkage: Linkage,
    pub complexity: ComplexityConfig,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_range: 3..=10,
            step: 10,
            distance: DistanceMode::default(),
            linkage: Linkage::default(),
            complexity: ComplexityConfig::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRecord<T> {
    pub weights: Weights,
    pub n_clusters: usize,
    pub uniform_complexity: T,
    pub decomposition: Decomposition,
}

/// Combined similarity, distance and dendrogram for one weighting.
pub fn build_dendrogram<T: Real>(
    measures: &SimilarityMeasures<T>,
    weights: &Weights,
    distance: DistanceMode,
    linkage: Linkage,
) -> Result<Dendrogram<T>> {
    let s = combine(measures, weights)?;
    Ok(agglomerate(&similarity_to_distance(&s, distance), linkage))
}

/// One record per (weighting, N), ordered by weights then N.
pub fn sweep<T: Real>(m: &Monolith, config: &SweepConfig) -> Result<Vec<SweepRecord<T>>> {
    let (lo, hi) = (*config.n_range.start(), *config.n_range.end());
    if lo == 0 || lo > hi {
        return Err(Error::Precondition(format!("cluster range {lo}..={hi} is empty or starts at 0")));
    }
    if hi > m.num_entities() {
        return Err(Error::Precondition(format!(
            "cannot cut {} entities into {hi} clusters",
            m.num_entities()
        )));
    }
    let weightings = enumerate_weightings(config.step)?;
    let measures = SimilarityMeasures::<T>::compute(m);
    let engine = ComplexityEngine::<T>::new(m, config.complexity);
    engine.max_complexity();

    let cell = |w: &Weights| -> Result<Vec<SweepRecord<T>>> {
        let wrap = |n: usize| move |e: Error| Error::SweepCell { weights: *w, n_clusters: n, source: Box::new(e) };
        validate_weights(w, config.step).map_err(wrap(lo))?;
        let dendrogram = build_dendrogram(&measures, w, config.distance, config.linkage).map_err(wrap(lo))?;
        config
            .n_range
            .clone()
            .map(|n| {
                let decomposition = dendrogram.cut(n).map_err(wrap(n))?;
                let uniform_complexity = engine.uniform(&decomposition).map_err(wrap(n))?;
                Ok(SweepRecord { weights: *w, n_clusters: n, uniform_complexity, decomposition })
            })
            .collect()
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = config.workers {
        builder = builder.num_threads(workers);
    }
    let pool = builder.build().map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    let cells: Vec<Result<Vec<SweepRecord<T>>>> = pool.install(|| weightings.par_iter().map(cell).collect());
    let mut out = Vec::with_capacity(weightings.len() * (hi - lo + 1));
    for c in cells {
        out.extend(c?);
    }
    Ok(out)
}

/// `access,write,read,sequence,nClusters,uniformComplexity`, complexity with
/// 9 decimals.
pub fn sweep_csv<T: Scalar>(records: &[SweepRecord<T>]) -> String {
    let mut out = String::from("access,write,read,sequence,nClusters,uniformComplexity\n");
    for r in records {
        let w = r.weights;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.9}",
            w.access,
            w.write,
            w.read,
            w.sequence,
            r.n_clusters,
            r.uniform_complexity.as_f64()
        );
    }
    out
}

/// Lowest-complexity record for each N; ties go to the smallest weights.
pub fn best_per_n<T: Scalar>(records: &[SweepRecord<T>]) -> BTreeMap<usize, SweepRecord<T>> {
    let mut best: BTreeMap<usize, &SweepRecord<T>> = BTreeMap::new();
    for r in records {
        best.entry(r.n_clusters)
            .and_modify(|cur| {
                let lower = r.uniform_complexity < cur.uniform_complexity;
                let tie = r.uniform_complexity == cur.uniform_complexity && r.weights < cur.weights;
                if lower || tie {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    best.into_iter().map(|(n, r)| (n, r.clone())).collect()
}

pub fn best_per_n_csv<T: Scalar>(best: &BTreeMap<usize, SweepRecord<T>>) -> String {
    let mut out = String::from("nClusters,access,write,read,sequence,uniformComplexity\n");
    for (n, r) in best {
        let w = r.weights;
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{:.9}",
            w.access,
            w.write,
            w.read,
            w.sequence,
            r.uniform_complexity.as_f64()
        );
    }
    out
}
