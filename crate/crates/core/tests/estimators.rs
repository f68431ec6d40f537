mod common;

use common::*;
use joinest::estimators::{estimate_with_guarantee, trial_rng, DriverConfig, Estimator, StrategyConfig};
use joinest::wcoj::generic_join;
use joinest::{Binding, Query, VarSet};

fn strategies() -> Vec<(&'static str, StrategyConfig)> {
    vec![
        ("wander-join", StrategyConfig::wander_join()),
        ("alley-0.25", StrategyConfig::alley_plus(0.25)),
        ("alley-0.5", StrategyConfig::alley_plus(0.5)),
        ("gj-sample", StrategyConfig::gj_sample()),
        ("drs", StrategyConfig::drs()),
        ("drs-boosted", StrategyConfig::drs().with_tie_boost(true).with_any_edge_boost(true)),
        ("drs-skip", StrategyConfig::drs().with_skip(true)),
        ("wander-join-skip", StrategyConfig::wander_join().with_skip(true)),
    ]
}

#[test]
fn every_strategy_is_unbiased_on_every_shape() {
    let mut r = rng(11);
    for &(shape, text) in SHAPES {
        let db = shape_db(&mut r, 12, 4);
        let q = Query::parse(text, &db).unwrap();
        let out = oracle_out(&q) as f64;
        for (name, cfg) in strategies() {
            let est = Estimator::new(&q, cfg).unwrap();
            let m = Moments::of((0..20_000).map(|i| est.estimate(&mut trial_rng(5, i))));
            assert!(m.z(out) < 4.5, "{name} on {shape}: mean {} vs OUT {out}, se {}", m.mean, m.se());
        }
    }
}

#[test]
fn alley_with_full_branching_is_exact() {
    let mut r = rng(12);
    for &(shape, text) in SHAPES {
        let db = shape_db(&mut r, 15, 4);
        let q = Query::parse(text, &db).unwrap();
        let est = Estimator::new(&q, StrategyConfig::alley_plus(1.0)).unwrap();
        assert_eq!(est.estimate(&mut rng(0)), oracle_out(&q) as f64, "{shape}");
        assert_eq!(est.variance_bound(7.0), 0.0);
    }
}

#[test]
fn residual_estimator_counts_extensions() {
    let db = skew_db(3, 3);
    let q = Query::parse("R(A,B), R(A,C)", &db).unwrap();
    let a = VarSet::single(0);
    let est = Estimator::residual(&q, a, StrategyConfig::alley_plus(1.0)).unwrap();
    for x in 1..=3 {
        let s = Binding::from_pairs(3, [(0, x)]);
        let want = generic_join(&q, q.scope().minus(a), &s).len() as f64;
        assert_eq!(est.estimate_from(&s, &mut rng(0)).0, want);
    }
}

#[test]
fn driver_is_deterministic_and_thread_independent() {
    let db = skew_db(3, 3);
    let q = Query::parse("R(A,B), R(A,C)", &db).unwrap();
    let est = Estimator::new(&q, StrategyConfig::drs()).unwrap();
    let cfg = DriverConfig::new(0.3, 0.1, 7);
    let one = estimate_with_guarantee(&est, &cfg).unwrap();
    let again = estimate_with_guarantee(&est, &cfg).unwrap();
    let threaded = estimate_with_guarantee(&est, &cfg.clone().with_threads(3)).unwrap();
    assert_eq!(one, again);
    assert_eq!(one, threaded);
    let sc = DriverConfig::new(0.3, 0.1, 7).success_count(64);
    let a = estimate_with_guarantee(&est, &sc).unwrap();
    let b = estimate_with_guarantee(&est, &sc.clone().with_threads(2)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.successes, Some(64));
}

#[test]
fn success_count_is_unbiased() {
    let db = skew_db(3, 3);
    let q = Query::parse("R(A,B), R(A,C)", &db).unwrap();
    let est = Estimator::new(&q, StrategyConfig::drs()).unwrap();
    let m = Moments::of((0..400).map(|seed| {
        estimate_with_guarantee(&est, &DriverConfig::new(0.3, 0.1, seed).success_count(64))
            .unwrap()
            .estimate
    }));
    assert!(m.z(11.0) < 3.0, "mean {} se {}", m.mean, m.se());
}

#[test]
fn driver_declares_zero_on_empty_joins() {
    let mut db = skew_db(3, 3);
    add(&mut db, "E", &["a", "b"], &[vec![9, 9]]);
    let q = Query::parse("R(A,B), E(A,C)", &db).unwrap();
    for cfg in [StrategyConfig::drs(), StrategyConfig::gj_sample()] {
        let est = Estimator::new(&q, cfg).unwrap();
        let rep = estimate_with_guarantee(&est, &DriverConfig::new(0.3, 0.1, 1)).unwrap();
        assert!(rep.declared_zero);
        assert_eq!(rep.estimate, 0.0);
        let rep = estimate_with_guarantee(&est, &DriverConfig::new(0.3, 0.1, 1).success_count(8)).unwrap();
        assert!(rep.declared_zero);
    }
}

#[test]
fn uniform_sampler_requires_plain_strategy() {
    let db = skew_db(2, 2);
    let q = Query::parse("R(A,B), R(A,C)", &db).unwrap();
    for cfg in [
        StrategyConfig::wander_join(),
        StrategyConfig::alley_plus(0.5),
        StrategyConfig::drs().with_tie_boost(true),
        StrategyConfig::gj_sample().with_skip(true),
    ] {
        let est = Estimator::new(&q, cfg).unwrap();
        assert!(est.uniform_sample(&mut rng(0)).is_err());
    }
}
