mod common;

use std::cmp::Ordering;

use common::*;
use joinest::query::{agm, fractional_edge_cover};
use joinest::Query;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn edges_of(q: &Query) -> Vec<Vec<usize>> {
    q.atoms().iter().map(|a| a.vars().iter().collect()).collect()
}

#[test]
fn triangle_cover_is_three_halves() {
    let db = graph_db(4, 12, 6);
    let q = Query::parse("E(A,B), E(B,C), E(A,C)", &db).unwrap();
    let x = fractional_edge_cover(&q);
    let half = BigRational::new(1.into(), 2.into());
    assert_eq!(x.weights(), &[half.clone(), half.clone(), half]);
    assert!((x.rho() - 1.5).abs() < 1e-12);
    let n = q.atom(0).relation().len() as f64;
    assert!((agm(&x).value() - n.powf(1.5)).abs() < 1e-9 * n.powf(1.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in 0u64..100_000) {
        let (db, text) = random_hypergraph(&mut rng(seed), 5, 5);
        let q = Query::parse(&text, &db).unwrap();
        let x = fractional_edge_cover(&q);
        let want = lp_by_vertices(&edges_of(&q), q.n_vars(), &q.sizes());
        prop_assert!(x.is_feasible(&q));
        prop_assert_eq!(compare_log_objective(x.weights(), &want, &q.sizes()), Ordering::Equal, "{}", text);
        prop_assert_eq!(x.weights(), &want[..], "{}", text);
    }

    #[test]
    fn agm_bounds_the_output(seed in 0u64..100_000) {
        let (db, text) = random_hypergraph(&mut rng(seed), 4, 4);
        let q = Query::parse(&text, &db).unwrap();
        let x = fractional_edge_cover(&q);
        let out = oracle_out(&q);
        prop_assert_ne!(compare_product_with(x.weights(), &q.sizes(), out), Ordering::Less);
        prop_assert_ne!(agm(&x).cmp_int(out), Ordering::Less);
    }

    #[test]
    fn subquery_sums_stay_below_the_full_product(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let (db, text) = random_hypergraph(&mut r, 4, 4);
        let q = Query::parse(&text, &db).unwrap();
        let opt: Vec<f64> = (0..q.atoms().len()).map(|f| fractional_edge_cover(&q).weight(f)).collect();
        for x in [opt, vec![1.0; q.atoms().len()], random_cover(&q, &mut r)] {
            for i in proper_subsets(&q) {
                let (lhs, rhs) = subquery_sum(&q, &x, i);
                prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{text} I={i:?}: {lhs} > {rhs}");
            }
            for a in q.scope().iter() {
                let (lhs, rhs) = single_attribute_sum(&q, &x, a);
                prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{text} A={a}: {lhs} > {rhs}");
            }
        }
    }
}

#[test]
fn empty_relations_zero_the_bound() {
    let mut db = joinest::Database::new();
    add(&mut db, "R", &["a", "b"], &[vec![1, 2]]);
    db.add("S", &["a", "b"], &[]).unwrap();
    let q = Query::parse("R(A,B), S(B,C)", &db).unwrap();
    let x = fractional_edge_cover(&q);
    assert!(x.weights()[1] > BigRational::zero());
    assert!(agm(&x).is_zero());
}
