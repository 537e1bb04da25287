//! Seeded synthetic monoliths with planted entity families.
//!
//! Entities `1..=n_entities` are split into `n_families` contiguous blocks and
//! functionality `j` belongs to family `j % n_families`. Each access stays in
//! the functionality's own block with probability `clusteredness_bias` and
//! otherwise picks any entity. The stream comes from ChaCha8 seeded with
//! `seed`, so output is identical across platforms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::model::{Access, EntityId, Functionality, Mode, Monolith, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct GenParams {
    pub seed: u64,
    pub n_entities: usize,
    pub n_functionalities: usize,
    pub traces_per_functionality: usize,
    pub max_trace_length: usize,
    pub write_ratio: f64,
    pub clusteredness_bias: f64,
    pub n_families: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            n_entities: 12,
            n_functionalities: 8,
            traces_per_functionality: 2,
            max_trace_length: 10,
            write_ratio: 0.3,
            clusteredness_bias: 0.8,
            n_families: 3,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n-entities", self.n_entities),
            ("n-functionalities", self.n_functionalities),
            ("traces-per-functionality", self.traces_per_functionality),
            ("max-trace-length", self.max_trace_length),
            ("n-families", self.n_families),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        for (name, value) in [("write-ratio", self.write_ratio), ("clusteredness-bias", self.clusteredness_bias)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {value}")));
            }
        }
        if self.n_families > self.n_entities || self.n_families > self.n_functionalities {
            return Err(Error::InvalidParams(format!(
                "{} families need at least as many entities and functionalities",
                self.n_families
            )));
        }
        Ok(())
    }

    /// Entity ids of family `f`.
    fn family(&self, f: usize) -> std::ops::Range<usize> {
        let start = f * self.n_entities / self.n_families;
        let end = (f + 1) * self.n_entities / self.n_families;
        start + 1..end + 1
    }
}

/// Builds a monolith in which every entity is accessed at least once.
///
/// Entities left untouched by the random traces are appended to the first
/// trace of a functionality of their family, so such a trace may exceed
/// `max_trace_length`.
pub fn generate_monolith(p: &GenParams) -> Result<Monolith> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let draw_mode = |rng: &mut ChaCha8Rng| if rng.random_bool(p.write_ratio) { Mode::Write } else { Mode::Read };
    let width = (p.n_functionalities - 1).to_string().len();

    let mut functionalities: Vec<Functionality> = (0..p.n_functionalities)
        .map(|j| {
            let family = p.family(j % p.n_families);
            let traces = (0..p.traces_per_functionality)
                .map(|t| {
                    let len = rng.random_range(1..=p.max_trace_length);
                    let accesses = (0..len)
                        .map(|_| {
                            let entity = if rng.random_bool(p.clusteredness_bias) {
                                rng.random_range(family.clone())
                            } else {
                                rng.random_range(1..=p.n_entities)
                            };
                            Access::new(EntityId(entity as i64), draw_mode(&mut rng))
                        })
                        .collect();
                    Trace::new(t as u64, accesses)
                })
                .collect();
            Functionality::new(format!("f{j:0width$}"), traces)
        })
        .collect();

    let mut used = vec![false; p.n_entities + 1];
    for a in functionalities.iter().flat_map(|f| &f.traces).flat_map(|t| &t.accesses) {
        used[a.entity.0 as usize] = true;
    }
    let mut per_family_turn = vec![0usize; p.n_families];
    for e in 1..=p.n_entities {
        if used[e] {
            continue;
        }
        let f = (0..p.n_families).find(|&f| p.family(f).contains(&e)).expect("families cover all entities");
        // functionalities of family f are f, f + k, f + 2k, ...
        let members = (p.n_functionalities - f).div_ceil(p.n_families);
        let j = f + (per_family_turn[f] % members) * p.n_families;
        per_family_turn[f] += 1;
        let mode = draw_mode(&mut rng);
        functionalities[j].traces[0].accesses.push(Access::new(EntityId(e as i64), mode));
    }

    let entities: BTreeMap<EntityId, Option<String>> =
        (1..=p.n_entities).map(|e| (EntityId(e as i64), Some(format!("Entity{e}")))).collect();
    Monolith::new(functionalities, entities)
}

/// The entity families as a decomposition, one cluster per family.
pub fn planted_partition(p: &GenParams) -> Result<Decomposition> {
    p.validate()?;
    Decomposition::from_groups((0..p.n_families).map(|f| p.family(f).map(|e| EntityId(e as i64))))
}
