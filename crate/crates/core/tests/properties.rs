use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use imputebench::imputers::BUILTIN_METHODS;
use imputebench::metrics::{mae, mape, pcv, rmse};
use imputebench::sampler::describe_mask;
use imputebench::{
    datasets, run_benchmark_with, sample_mask, BenchmarkConfig, Execution, GappedSeries, Imputer,
    SampleSpec,
};
use proptest::prelude::*;

/// Gapped series with at least two distinct observed values.
fn gapped_series() -> impl Strategy<Value = GappedSeries> {
    (4usize..80)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3f64..1e3, n),
                prop::collection::vec(any::<bool>(), n),
                prop::option::of(2usize..8),
            )
        })
        .prop_filter_map("needs two distinct observations", |(vals, gaps, period)| {
            let cells: Vec<Option<f64>> = vals
                .iter()
                .zip(&gaps)
                .map(|(v, &g)| (!g).then_some(*v))
                .collect();
            let distinct: BTreeSet<u64> = cells.iter().flatten().map(|v| v.to_bits()).collect();
            if distinct.len() < 2 {
                return None;
            }
            GappedSeries::new(cells.clone(), period)
                .or_else(|_| GappedSeries::new(cells, None))
                .ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn imputers_keep_observed_and_fill_every_gap(g in gapped_series(), seed in any::<u64>()) {
        for name in BUILTIN_METHODS {
            let r = Imputer::named(name).unwrap().impute(&g, seed).unwrap();
            prop_assert_eq!(r.values().len(), g.len());
            for (out, cell) in r.values().iter().zip(g.values()) {
                prop_assert!(out.is_finite(), "{name}");
                if let Some(v) = cell {
                    prop_assert_eq!(out.to_bits(), v.to_bits(), "{} moved an observation", name);
                }
            }
        }
    }

    #[test]
    fn imputing_a_complete_series_is_identity(vals in prop::collection::vec(-1e3f64..1e3, 4..60)) {
        let g = GappedSeries::new(vals.iter().copied().map(Some).collect(), Some(4)).unwrap();
        for name in ["na.approx", "na.interp", "na.interpolation", "na.locf", "na.mean"] {
            let r = Imputer::named(name).unwrap().impute(&g, 0).unwrap();
            prop_assert_eq!(r.values(), &vals[..]);
        }
    }

    #[test]
    fn imputation_is_repeatable(g in gapped_series(), seed in any::<u64>()) {
        for name in BUILTIN_METHODS {
            let imp = Imputer::named(name).unwrap();
            prop_assert_eq!(imp.impute(&g, seed).unwrap(), imp.impute(&g, seed).unwrap());
        }
    }

    #[test]
    fn metric_invariants(
        pairs in prop::collection::vec((1.0f64..100.0, -50.0f64..50.0), 2..40),
        c in 0.1f64..1e3,
    ) {
        let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let imputed: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
        let (r, a) = (rmse(&truth, &imputed).unwrap(), mae(&truth, &imputed).unwrap());
        prop_assert!(a <= r * (1.0 + 1e-12));
        prop_assert_eq!(rmse(&truth, &truth).unwrap(), 0.0);
        prop_assert_eq!(mae(&truth, &truth).unwrap(), 0.0);

        let st: Vec<f64> = truth.iter().map(|v| v * c).collect();
        let si: Vec<f64> = imputed.iter().map(|v| v * c).collect();
        prop_assert!((rmse(&st, &si).unwrap() - c * r).abs() <= 1e-9 * c * r.max(1.0));
        let m = mape(&truth, &imputed).unwrap();
        prop_assert!((mape(&st, &si).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
        if let (Ok(p), Ok(ps)) = (pcv(&truth, &imputed), pcv(&st, &si)) {
            prop_assert!((p - ps).abs() <= 1e-8 * p.abs().max(1.0));
        }
    }

    #[test]
    fn sampled_masks_have_exact_counts(
        n in 2usize..400,
        b in 1u32..99,
        mar in any::<bool>(),
        block in 1u32..100,
        seed in any::<u64>(),
    ) {
        let spec = if mar {
            SampleSpec::mar(b as f64, block as f64, true, seed)
        } else {
            SampleSpec::mcar(b as f64, seed)
        };
        let m = spec.missing_count(n);
        prop_assume!(m > 0 && m < n);
        prop_assume!(!mar || spec.block_length(m) > 0);
        let mask = sample_mask(&spec, n).unwrap();
        prop_assert_eq!(mask.count(), m);
        prop_assert!(mask.removed().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(mask.removed().iter().all(|&i| i < n));
        if mar {
            let k = spec.block_length(m);
            let short = describe_mask(&mask).runs.iter().filter(|&&r| r < k).count();
            prop_assert!(short <= 1);
        }
    }
}

#[test]
fn mcar_is_close_to_uniform() {
    let n = 50;
    let draws = 4000;
    let mut hits = vec![0usize; n];
    for seed in 0..draws {
        for &i in sample_mask(&SampleSpec::mcar(20.0, seed), n)
            .unwrap()
            .removed()
        {
            hits[i] += 1;
        }
    }
    // Expected 800 per index; sd is about 25.
    let expected = draws as f64 * 0.2;
    let chi2: f64 = hits
        .iter()
        .map(|&h| (h as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 100.0, "chi2 = {chi2}, hits = {hits:?}");
    assert!(hits.iter().all(|&h| (h as f64 - expected).abs() < 150.0));
}

#[test]
fn mar_blocks_cover_both_ends() {
    let mut first = false;
    let mut last = false;
    for seed in 0..500 {
        let mask = sample_mask(&SampleSpec::mar(10.0, 50.0, true, seed), 100).unwrap();
        first |= mask.contains(0);
        last |= mask.contains(99);
    }
    assert!(first && last);
}

type Seen = Arc<Mutex<Vec<(u64, Vec<Option<f64>>)>>>;

fn recorder(name: &str, log: Seen) -> Imputer {
    Imputer::custom(name, move |g: &GappedSeries, seed| {
        log.lock().unwrap().push((seed, g.values().to_vec()));
        let first = g.observed_values().first().copied().unwrap_or(0.0);
        Ok(g.values().iter().map(|v| v.unwrap_or(first)).collect())
    })
}

#[test]
fn every_method_sees_the_same_mask_in_a_cell() {
    let (a, b): (Seen, Seen) = Default::default();
    let mut cfg = BenchmarkConfig::new(datasets::austres());
    cfg.repetition = 4;
    cfg.methods = vec![recorder("first", a.clone()), recorder("second", b.clone())];
    let profile = run_benchmark_with(&cfg, Execution::Serial).unwrap();

    let a = a.lock().unwrap();
    let b = b.lock().unwrap();
    assert_eq!(a.len(), 9 * 4);
    for ((sa, ga), (sb, gb)) in a.iter().zip(b.iter()) {
        assert_eq!(ga, gb, "methods saw different masks");
        assert_ne!(sa, sb, "methods share a seed");
    }
    let masks: BTreeSet<Vec<bool>> = a
        .iter()
        .map(|(_, g)| g.iter().map(Option::is_none).collect())
        .collect();
    assert_eq!(masks.len(), a.len(), "repetitions reused a mask");
    assert_eq!(
        profile
            .seeds
            .iter()
            .flatten()
            .collect::<BTreeSet<_>>()
            .len(),
        36
    );
}

#[test]
fn parallel_schedule_does_not_change_output() {
    let mut cfg = BenchmarkConfig::new(datasets::nottem());
    cfg.repetition = 6;
    cfg.methods = Imputer::defaults()
        .into_iter()
        .chain([Imputer::named("na.random").unwrap()])
        .collect();
    let serial = run_benchmark_with(&cfg, Execution::Serial)
        .unwrap()
        .to_json();
    for jobs in [2, 3, 8] {
        let parallel = run_benchmark_with(&cfg, Execution::Parallel { jobs })
            .unwrap()
            .to_json();
        assert_eq!(serial, parallel, "jobs = {jobs}");
    }
}
