use std::collections::BTreeSet;

use proptest::prelude::*;
use qpr_core::rng::derive_seed;
use qpr_core::{
    recognize_feature, run_search, verify_candidate, DistanceValue, Engine, FeatureMode,
    FeatureValue, FullState, PatternDatabase, QueryContext, ReducedState, RegisterLayout,
    SearchConfig, SearchOutcome,
};

#[derive(Debug, Clone)]
struct Case {
    targets: Vec<u64>,
    spurious: Vec<u64>,
    query: u64,
    alpha: u64,
    extractor_mode: bool,
}

impl Case {
    fn build(&self, bits: u32) -> (PatternDatabase, QueryContext) {
        let db = PatternDatabase::build(&self.targets, &self.spurious, bits, bits, bits).unwrap();
        let mode = if self.extractor_mode {
            FeatureMode::Extractor
        } else {
            FeatureMode::Idealized
        };
        let query = self.query.min(FeatureValue::max_extracted(bits));
        let alpha = self.alpha.min(db.d_max().get() - 1);
        let ctx = QueryContext::new(&db, FeatureValue(query), DistanceValue(alpha), mode).unwrap();
        (db, ctx)
    }
}

fn case(max_records: usize) -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(0u64..8, 0..max_records),
        prop::collection::vec(0u64..8, 0..max_records),
        0u64..8,
        0u64..3,
        any::<bool>(),
    )
        .prop_filter("non-empty", |(t, s, ..)| !t.is_empty() || !s.is_empty())
        .prop_map(|(targets, spurious, query, alpha, extractor_mode)| Case {
            targets,
            spurious,
            query,
            alpha,
            extractor_mode,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engines_agree(c in case(8), j in 0u64..6) {
        let (db, ctx) = c.build(4);
        let mut full = FullState::prepare(RegisterLayout::for_database(&db)).unwrap();
        let mut reduced = ReducedState::build(&db, &ctx, &BTreeSet::new()).unwrap();
        for _ in 0..j {
            full.apply_gpr(&db, &ctx).unwrap();
            reduced.apply_gpr();
        }
        prop_assert!(full.max_ancilla_amplitude() <= 1e-12);
        for (a, b) in full.index_marginal().iter().zip(reduced.index_marginal()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn search_is_sound_and_within_budget(c in case(40), seed in any::<u64>(), full in any::<bool>()) {
        let (db, ctx) = c.build(4);
        let engine = if full && db.len() <= 16 { Engine::Full } else { Engine::Reduced };
        let config = SearchConfig { seed, engine, ..Default::default() };
        let excluded: BTreeSet<usize> = (0..db.len()).filter(|i| i % 3 == seed as usize % 3).collect();
        let report = run_search(&db, &ctx, &config, &excluded).unwrap();
        prop_assert!(report.total_gpr <= config.query_cap(db.len()));
        prop_assert_eq!(report.total_gpr, report.rounds.iter().map(|r| r.j).sum::<u64>());
        if let SearchOutcome::Found(i) = report.outcome {
            prop_assert!(!excluded.contains(&i));
            prop_assert!(verify_candidate(&db, &ctx, i).unwrap());
        }
        let marked = db.marked_set(ctx.query_feature, ctx.alpha, ctx.mode).unwrap();
        if marked.is_subset(&excluded) {
            prop_assert_eq!(report.outcome, SearchOutcome::NotFound);
        }
    }

    #[test]
    fn exhaustive_recognition_shrinks_marked_set(c in case(40), seed in any::<u64>()) {
        let (db, ctx) = c.build(4);
        let config = SearchConfig { seed, ..Default::default() };
        let entry = recognize_feature(&db, ctx.query_feature, ctx.alpha, ctx.mode, &config, true).unwrap();
        let marked = db.marked_set(ctx.query_feature, ctx.alpha, ctx.mode).unwrap();
        let mut excluded = BTreeSet::new();
        let mut remaining = marked.len();
        for &i in &entry.indices {
            prop_assert!(marked.contains(&i));
            prop_assert!(excluded.insert(i), "duplicate index {}", i);
            let now = marked.difference(&excluded).count();
            prop_assert_eq!(now + 1, remaining);
            remaining = now;
        }
    }
}

#[test]
fn zero_iteration_round_samples_uniformly() {
    let db = PatternDatabase::build(&[3, 3, 3], &[1; 13], 4, 4, 4).unwrap();
    let ctx = QueryContext::new(
        &db,
        FeatureValue(3),
        DistanceValue(0),
        FeatureMode::Idealized,
    )
    .unwrap();
    let state = ReducedState::build(&db, &ctx, &BTreeSet::new()).unwrap();
    for p in state.index_marginal() {
        assert!((p - 1.0 / 16.0).abs() < 1e-15);
    }
    assert!((state.success_probability() - 3.0 / 16.0).abs() < 1e-15);
}

#[test]
fn uncapped_search_always_terminates_with_a_match() {
    let mut spurious = vec![1u64; 255];
    spurious[0] = 2;
    let db = PatternDatabase::build(&[0], &spurious, 4, 4, 4).unwrap();
    let ctx = QueryContext::new(
        &db,
        FeatureValue(0),
        DistanceValue(0),
        FeatureMode::Idealized,
    )
    .unwrap();
    for trial in 0..1000 {
        let config = SearchConfig {
            seed: derive_seed(2024, trial),
            cap_factor: f64::INFINITY,
            ..Default::default()
        };
        let report = run_search(&db, &ctx, &config, &BTreeSet::new()).unwrap();
        assert_eq!(report.outcome, SearchOutcome::Found(0));
    }
}

#[test]
fn mean_cost_at_sixty_four_records() {
    let db = PatternDatabase::build(&[0], &[1; 63], 4, 4, 4).unwrap();
    let ctx = QueryContext::new(
        &db,
        FeatureValue(0),
        DistanceValue(0),
        FeatureMode::Idealized,
    )
    .unwrap();
    let trials = 1000;
    let mut total = 0u64;
    let mut found = 0usize;
    for trial in 0..trials {
        let config = SearchConfig {
            seed: derive_seed(64, trial),
            ..Default::default()
        };
        let report = run_search(&db, &ctx, &config, &BTreeSet::new()).unwrap();
        total += report.total_gpr;
        found += usize::from(report.outcome != SearchOutcome::NotFound);
    }
    assert!(total as f64 / trials as f64 <= 40.0);
    assert!(found as f64 / trials as f64 >= 0.95);
}

#[test]
fn full_engine_search_matches_single_record() {
    let db = PatternDatabase::build(&[5, 9, 12], &[3, 6, 14], 4, 4, 4).unwrap();
    let ctx = QueryContext::new(
        &db,
        FeatureValue(9),
        DistanceValue(0),
        FeatureMode::Idealized,
    )
    .unwrap();
    let config = SearchConfig {
        engine: Engine::Full,
        seed: 5,
        qubit_cap: 15,
        ..Default::default()
    };
    let report = run_search(&db, &ctx, &config, &BTreeSet::new()).unwrap();
    assert_eq!(report.outcome, SearchOutcome::Found(1));
    let config = SearchConfig {
        qubit_cap: 14,
        ..config
    };
    assert!(run_search(&db, &ctx, &config, &BTreeSet::new()).is_err());
}
