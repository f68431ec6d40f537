mod common;

use common::*;
use joinest::component::{ComponentSampler, Target};
use joinest::estimators::trial_rng;
use joinest::{Database, Query};

#[test]
fn sste_and_sust_count_canonical_answers() {
    for (i, &(shape, text)) in GRAPH_SHAPES.iter().enumerate() {
        let db = graph_db(100 + i as u64, 14, 6);
        let q = Query::parse(text, &db).unwrap();
        let s = ComponentSampler::new(&q, Target::Canonical).unwrap();
        let want = canonical_answers(&q, &db, &s.plan().components).len() as f64;
        let sste = Moments::of((0..20_000).map(|t| s.sste_estimate(&mut trial_rng(1, t))));
        assert!(sste.z(want) < 4.5, "SSTE on {shape}: {} vs {want} (se {})", sste.mean, sste.se());
        let sust = Moments::of((0..40_000).map(|t| s.sust_estimate(&mut trial_rng(2, t)).unwrap()));
        assert!(sust.z(want) < 4.5, "SUST on {shape}: {} vs {want} (se {})", sust.mean, sust.se());
    }
}

#[test]
fn all_answer_target_counts_every_answer() {
    for (i, &(shape, text)) in GRAPH_SHAPES.iter().enumerate() {
        let db = graph_db(200 + i as u64, 14, 6);
        let q = Query::parse(text, &db).unwrap();
        let Ok(s) = ComponentSampler::new(&q, Target::AllAnswers) else {
            // A zero-weight edge touches a cycle.
            assert_eq!(shape, "triangle-tail");
            continue;
        };
        let want = oracle_out(&q) as f64;
        let m = Moments::of((0..20_000).map(|t| s.sste_estimate(&mut trial_rng(3, t))));
        assert!(m.z(want) < 4.5, "{shape}: {} vs {want}", m.mean);
    }
}

#[test]
fn sust_is_uniform_over_its_target() {
    let db = graph_db(7, 12, 5);
    for text in ["E(A,B), E(B,C), E(C,A)", "E(A,B), E(A,C)"] {
        let q = Query::parse(text, &db).unwrap();
        for target in [Target::Canonical, Target::AllAnswers] {
            let s = ComponentSampler::new(&q, target).unwrap();
            let answers = match target {
                Target::Canonical => canonical_answers(&q, &db, &s.plan().components),
                Target::AllAnswers => oracle_answers(&q),
            };
            let trials = 200_000;
            let got = tally((0..trials).filter_map(|t| s.sust_sample(&mut trial_rng(4, t)).unwrap().map(|b| b.values())));
            assert!(got.keys().all(|k| answers.contains(k)), "{text}: sample outside the target");
            let counts: Vec<u64> = answers.iter().map(|a| got.get(a).copied().unwrap_or(0)).collect();
            let total: u64 = counts.iter().sum();
            let p = s.success_probability() * answers.len() as f64;
            let expect = p * trials as f64;
            assert!(
                (total as f64 - expect).abs() < 5.0 * expect.sqrt(),
                "{text}: {total} successes vs {expect}"
            );
            if answers.len() > 1 {
                let chi = chi_square_uniform(&counts);
                assert!(chi < chi_square_quantile(answers.len() - 1, 0.999), "{text} {target:?}: χ² {chi}");
            }
        }
    }
}

#[test]
fn unsymmetric_relations_are_refused_where_needed() {
    let mut db = Database::new();
    add(&mut db, "E", &["s", "t"], &[vec![1, 2], vec![2, 3], vec![3, 1]]);
    let q = Query::parse("E(A,B), E(B,C), E(C,A)", &db).unwrap();
    assert!(ComponentSampler::new(&q, Target::AllAnswers).is_err());
    let s = ComponentSampler::new(&q, Target::Canonical).unwrap();
    // Three directed rotations of one triangle; one starts at vertex 1.
    let m = Moments::of((0..5_000).map(|t| s.sste_estimate(&mut trial_rng(5, t))));
    assert!(m.z(1.0) < 4.5, "{}", m.mean);
    assert!(s.sust_sample(&mut rng(0)).is_err());
}
