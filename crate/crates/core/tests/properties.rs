mod support;

use std::collections::{BTreeMap, BTreeSet};

use monodecomp::analysis::{enumerate_weightings, ols_fit, sweep, Intercept, SweepConfig, SweepRecord};
use monodecomp::clustering::{agglomerate, DistanceMatrix};
use monodecomp::decomposition::assert_partition;
use monodecomp::metrics::{partition_trace, prune, system_complexity, TraceAggregation};
use monodecomp::model::restrict_monolith;
use monodecomp::mojo::{align_universes, max_mojo_by_enumeration, max_mojo_constructive, mojo_distance};
use monodecomp::similarity::combine;
use monodecomp::trace_file::{parse_trace_file, write_trace_file};
use monodecomp::{
    mojofm, AlignStrategy, ComplexityConfig, Decomposition, EntityId, Functionality, Linkage, Monolith,
    Rational64, SimilarityMeasures, Weights,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use support::Shape;

fn small() -> Shape {
    Shape { max_entities: 7, max_functionalities: 5, max_traces: 3, max_accesses: 8 }
}

fn monolith(seed: u64) -> Monolith {
    support::random_monolith(&mut support::rng(seed), small())
}

fn scores(m: &Monolith, d: &Decomposition, config: ComplexityConfig) -> BTreeMap<String, Rational64> {
    let report = system_complexity::<Rational64>(m, d, config).unwrap();
    report.functionalities.into_iter().map(|(name, f)| (name, f.complexity)).collect()
}

/// Random symmetric distance matrix with distinct off-diagonal values.
fn distances(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = support::rng(seed);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.random_range(0.01..1.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trace_file_round_trip(seed in any::<u64>()) {
        let m = monolith(seed);
        let text = write_trace_file(&m);
        let parsed = parse_trace_file(text.as_bytes()).unwrap();
        prop_assert_eq!(&parsed, &m);
        prop_assert_eq!(write_trace_file(&parsed), text);
    }

    #[test]
    fn restrict_is_idempotent(seed in any::<u64>(), fmask in any::<u8>(), emask in any::<u8>()) {
        let m = monolith(seed);
        let fs: BTreeSet<String> = m.functionality_names().into_iter().enumerate()
            .filter(|(i, _)| fmask >> (i % 8) & 1 == 1).map(|(_, n)| n).collect();
        let es: BTreeSet<EntityId> = m.entity_ids().into_iter().enumerate()
            .filter(|(i, _)| emask >> (i % 8) & 1 == 1).map(|(_, e)| e).collect();
        let once = restrict_monolith(&m, &fs, &es).unwrap().monolith;
        let remaining: BTreeSet<String> = fs.intersection(&once.functionality_names()).cloned().collect();
        let twice = restrict_monolith(&once, &remaining, &es).unwrap().monolith;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn combine_is_the_weighted_average(seed in any::<u64>(), pick in 0usize..286) {
        let m = monolith(seed);
        let measures = SimilarityMeasures::<Rational64>::compute(&m);
        let w = enumerate_weightings(10).unwrap()[pick];
        let combined = combine(&measures, &w).unwrap();
        let hundred = Rational64::from_integer(100);
        let c = |x: u32| Rational64::from_integer(x as i64) / hundred;
        for k in 0..combined.values().len() {
            let expect = measures.access.values()[k] * c(w.access)
                + measures.write.values()[k] * c(w.write)
                + measures.read.values()[k] * c(w.read)
                + measures.sequence.values()[k] * c(w.sequence);
            prop_assert_eq!(combined.values()[k], expect);
        }
    }

    #[test]
    fn duplicate_trace_keeps_set_measures(seed in any::<u64>()) {
        let m = monolith(seed);
        let mut fs: Vec<Functionality> = m.functionalities().cloned().collect();
        let copy = fs[0].traces[0].clone();
        let next_id = fs[0].traces.iter().map(|t| t.id).max().unwrap() + 1;
        fs[0].traces.push(monodecomp::Trace::new(next_id, copy.accesses));
        let dup = Monolith::new(fs, m.entities().clone()).unwrap();
        let a = SimilarityMeasures::<Rational64>::compute(&m);
        let b = SimilarityMeasures::<Rational64>::compute(&dup);
        prop_assert_eq!(a.access, b.access);
        prop_assert_eq!(a.read, b.read);
        prop_assert_eq!(a.write, b.write);

        let d = support::random_decomposition(&mut support::rng(seed ^ 1), &m.entity_ids());
        let max = ComplexityConfig { aggregation: TraceAggregation::Max, ..Default::default() };
        prop_assert_eq!(scores(&m, &d, max), scores(&dup, &d, max));

        // under the mean, only when every trace of the functionality is the copied one
        let mut single: Vec<Functionality> = m.functionalities().cloned().collect();
        single[0].traces.truncate(1);
        let once = Monolith::new(single.clone(), m.entities().clone()).unwrap();
        let first = single[0].traces[0].accesses.clone();
        single[0].traces.push(monodecomp::Trace::new(next_id, first));
        let twice = Monolith::new(single, m.entities().clone()).unwrap();
        let mean = ComplexityConfig::default();
        prop_assert_eq!(scores(&once, &d, mean), scores(&twice, &d, mean));
    }

    #[test]
    fn cuts_partition_and_nest(seed in any::<u64>(), n in 2usize..12) {
        let ids: Vec<EntityId> = (1..=n as i64).map(EntityId).collect();
        let d = DistanceMatrix::from_rows(ids.clone(), distances(seed, n)).unwrap();
        let universe: BTreeSet<EntityId> = ids.iter().copied().collect();
        for linkage in [Linkage::Average, Linkage::Single, Linkage::Complete] {
            let dg = agglomerate(&d, linkage);
            let mut previous: Option<Decomposition> = None;
            for k in (1..=n).rev() {
                let cut = dg.cut(k).unwrap();
                prop_assert_eq!(cut.num_clusters(), k);
                assert_partition(&cut, &universe);
                if let Some(finer) = &previous {
                    for cluster in cut.clusters().values() {
                        for member in cluster {
                            let owner = finer.cluster_of(*member).unwrap();
                            prop_assert!(finer.clusters()[owner].is_subset(cluster));
                        }
                    }
                }
                previous = Some(cut);
            }
            if linkage != Linkage::Single {
                prop_assert!(dg.merges().windows(2).all(|w| w[0].height <= w[1].height));
            }
        }
    }

    #[test]
    fn clustering_commutes_with_relabelling(seed in any::<u64>(), n in 2usize..10, k in 1usize..10) {
        let k = k.min(n);
        let values = distances(seed, n);
        let ids: Vec<EntityId> = (1..=n as i64).map(EntityId).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut support::rng(seed.wrapping_add(7)));
        // entity ids(perm[i]) sits at position i of the permuted matrix
        let permuted_ids: Vec<EntityId> = perm.iter().map(|&p| ids[p]).collect();
        let permuted: Vec<f64> = (0..n * n).map(|x| values[perm[x / n] * n + perm[x % n]]).collect();
        for linkage in [Linkage::Average, Linkage::Single, Linkage::Complete] {
            let a = agglomerate(&DistanceMatrix::from_rows(ids.clone(), values.clone()).unwrap(), linkage).cut(k).unwrap();
            let b = agglomerate(&DistanceMatrix::from_rows(permuted_ids.clone(), permuted.clone()).unwrap(), linkage)
                .cut(k)
                .unwrap();
            prop_assert!(a.same_partition(&b));
        }
    }

    #[test]
    fn trace_partitions_reassemble(seed in any::<u64>()) {
        let m = monolith(seed);
        let d = support::random_decomposition(&mut support::rng(seed ^ 3), &m.entity_ids());
        for (f, t) in m.traces() {
            let p = partition_trace(&f.name, t, &d).unwrap();
            let joined: Vec<_> = p.local_transactions.iter().flat_map(|lt| lt.accesses.clone()).collect();
            prop_assert_eq!(&joined, &t.accesses);
            prop_assert_eq!(p.remote_invocations.len() + 1, p.local_transactions.len());
            prop_assert!(p.local_transactions.windows(2).all(|w| w[0].cluster != w[1].cluster));
            for lt in &p.local_transactions {
                let distinct: BTreeSet<EntityId> = lt.accesses.iter().map(|a| a.entity).collect();
                let pruned = prune(&lt.accesses);
                prop_assert!(pruned.len() <= 2 * distinct.len());
                prop_assert_eq!(pruned, support::oracle_prune(&lt.accesses));
            }
        }
    }

    #[test]
    fn mojo_invariants(seed in any::<u64>(), n in 2i64..12) {
        let mut rng = support::rng(seed);
        let universe: Vec<EntityId> = (1..=n).map(EntityId).collect();
        let a = support::random_decomposition(&mut rng, &universe);
        let b = support::random_decomposition(&mut rng, &universe);
        let mno = mojo_distance(&a, &b).unwrap();
        prop_assert_eq!(mno == 0, a.same_partition(&b));
        prop_assert!(mno <= n as usize - 1 + a.num_clusters() - 1);
        let fm = mojofm(&a, &b).unwrap();
        prop_assert!((0.0..=100.0).contains(&fm.mojo_fm));
        prop_assert_eq!(fm.formatted() == "100.00", a.same_partition(&b));
        prop_assert!(fm.mno <= fm.max_mno);
    }

    #[test]
    fn alignment_yields_equal_universes(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let left: Vec<EntityId> = (1..=rng.random_range(1..8)).map(EntityId).collect();
        let right: Vec<EntityId> = (rng.random_range(1..6)..=rng.random_range(6..12)).map(EntityId).collect();
        let a = support::random_decomposition(&mut rng, &left);
        let b = support::random_decomposition(&mut rng, &right);
        for strategy in [AlignStrategy::BiggestCluster, AlignStrategy::DropUncommon] {
            if let Ok((a2, b2)) = align_universes(&a, &b, strategy) {
                prop_assert_eq!(a2.universe(), b2.universe());
                assert_partition(&a2, &b2.universe());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_records_stay_in_range(seed in any::<u64>()) {
        let m = support::random_monolith(
            &mut support::rng(seed),
            Shape { max_entities: 8, max_functionalities: 5, max_traces: 2, max_accesses: 8 },
        );
        prop_assume!(m.num_entities() >= 3);
        let config = SweepConfig { n_range: 1..=3, step: 25, ..Default::default() };
        for r in sweep::<f64>(&m, &config).unwrap() {
            prop_assert!((0.0..=1.0).contains(&r.uniform_complexity), "{} at {:?}", r.uniform_complexity, r.weights);
            assert_partition(&r.decomposition, &m.entity_set());
        }
    }

    #[test]
    fn regression_is_order_free_and_linear(seed in any::<u64>(), k in 0.5f64..20.0) {
        let mut rng = support::rng(seed);
        let dummy = Decomposition::singletons([EntityId(1)]);
        let mut records: Vec<SweepRecord<f64>> = enumerate_weightings(25)
            .unwrap()
            .into_iter()
            .flat_map(|w| (3..=6).map(move |n| (w, n)))
            .map(|(w, n)| SweepRecord {
                weights: w,
                n_clusters: n,
                uniform_complexity: rng.random_range(0.0..1.0),
                decomposition: dummy.clone(),
            })
            .collect();
        let base = ols_fit(&records, Intercept::None).unwrap();
        records.shuffle(&mut rng);
        let shuffled = ols_fit(&records, Intercept::None).unwrap();
        prop_assert!((base.r_squared - shuffled.r_squared).abs() < 1e-10);
        for r in records.iter_mut() {
            r.uniform_complexity *= k;
        }
        let scaled = ols_fit(&records, Intercept::None).unwrap();
        for (a, b) in shuffled.terms.iter().zip(&scaled.terms) {
            let close = |x: f64, y: f64| (x * k - y).abs() <= 1e-9 * (1.0 + y.abs());
            prop_assert!(close(a.coefficient, b.coefficient));
            prop_assert!(close(a.ci_low, b.ci_low) && close(a.ci_high, b.ci_high));
        }
    }
}

#[test]
fn real_sweep_design_has_rank_five() {
    let m = monodecomp::workload::generate_monolith(&Default::default()).unwrap();
    let records = sweep::<f64>(&m, &SweepConfig::default()).unwrap();
    assert_eq!(ols_fit(&records, Intercept::None).unwrap().rank, 5);
}

#[test]
fn constant_weights_are_rank_deficient() {
    let dummy = Decomposition::singletons([EntityId(1)]);
    let records: Vec<SweepRecord<f64>> = (3..=12)
        .map(|n| SweepRecord {
            weights: Weights::new(25, 25, 25, 25),
            n_clusters: n,
            uniform_complexity: 0.01 * n as f64,
            decomposition: dummy.clone(),
        })
        .collect();
    let err = ols_fit(&records, Intercept::None).unwrap_err();
    assert_eq!(err.code(), "RANK_DEFICIENT");
}

fn assert_max_mojo_closed_form(n: usize) {
    for sizes in support::integer_partitions(n) {
        let b = support::blocks(&sizes);
        assert_eq!(max_mojo_by_enumeration(&b).unwrap(), max_mojo_constructive(&b), "sizes {sizes:?}");
    }
}

#[test]
fn max_mojo_closed_form_up_to_ten() {
    for n in 2..=10 {
        assert_max_mojo_closed_form(n);
    }
}

#[test]
#[ignore = "enumerates every partition of 11 and 12 entities"]
fn max_mojo_closed_form_eleven_and_twelve() {
    for n in 11..=12 {
        assert_max_mojo_closed_form(n);
    }
}
