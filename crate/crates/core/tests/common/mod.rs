//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use joinest::wcoj::{brute_force_join, distinct};
use joinest::query::Component;
use joinest::query::Var;
use joinest::{Binding, Database, Query, Value, VarSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `R = {(i, 1) | i ∈ 1..=m} ∪ {(1, j) | j ∈ 2..=n}`; `R(A,B) ⋈ R(A,C)`
/// over it has `n² + m − 1` answers.
pub fn skew_db(m: u32, n: u32) -> Database {
    let mut rows: Vec<Vec<Value>> = (1..=m).map(|i| vec![i, 1]).collect();
    rows.extend((2..=n).map(|j| vec![1, j]));
    let mut db = Database::new();
    add(&mut db, "R", &["a", "b"], &rows);
    db
}

pub fn add(db: &mut Database, name: &str, schema: &[&str], rows: &[Vec<Value>]) {
    let refs: Vec<&[Value]> = rows.iter().map(Vec::as_slice).collect();
    db.add(name, schema, &refs).unwrap();
}

pub fn random_rows(rng: &mut impl Rng, arity: usize, n: usize, domain: u32) -> Vec<Vec<Value>> {
    (0..n)
        .map(|_| (0..arity).map(|_| rng.random_range(1..=domain)).collect())
        .collect()
}

/// A random binary relation without self-loops, optionally symmetric.
pub fn random_graph(rng: &mut impl Rng, n_edges: usize, vertices: u32, symmetric: bool) -> Vec<Vec<Value>> {
    let mut set = BTreeSet::new();
    let mut guard = 0;
    while set.len() < n_edges && guard < 10_000 {
        guard += 1;
        let a = rng.random_range(1..=vertices);
        let b = rng.random_range(1..=vertices);
        if a == b {
            continue;
        }
        set.insert((a, b));
        if symmetric {
            set.insert((b, a));
        }
    }
    set.into_iter().map(|(a, b)| vec![a, b]).collect()
}

/// Query shapes used across the suites.
pub const SHAPES: &[(&str, &str)] = &[
    ("triangle", "R(A,B), S(B,C), T(A,C)"),
    ("four-cycle", "R(A,B), S(B,C), T(C,D), U(A,D)"),
    ("three-star", "R(A,B), S(A,C), T(A,D)"),
    ("path-three", "R(A,B), S(B,C), T(C,D)"),
    ("ternary", "W(A,B,C), R(A,D), S(C,D)"),
];

/// All relations the shapes need, drawn at random.
/// Acyclic patterns over the `shape_db` relations.
pub const ACYCLIC_SHAPES: &[&str] = &[
    "R(A,B)",
    "R(A,B), S(B,C)",
    "R(A,B), S(B,C), T(C,D)",
    "R(A,B), S(A,C), T(A,D)",
    "R(A,B), S(B,C), T(B,D), U(D,E)",
    "W(A,B,C), R(A,D), S(C,E)",
    "R(A,B), S(C,D)",
];

pub fn shape_db(rng: &mut impl Rng, rows: usize, domain: u32) -> Database {
    let mut db = Database::new();
    for name in ["R", "S", "T", "U"] {
        add(&mut db, name, &["x", "y"], &random_rows(rng, 2, rows, domain));
    }
    add(&mut db, "W", &["x", "y", "z"], &random_rows(rng, 3, rows, domain));
    db
}

/// Distinct answers by nested loops.
pub fn oracle_answers(q: &Query) -> Vec<Vec<Value>> {
    distinct(brute_force_join(q))
}

pub fn oracle_out(q: &Query) -> u64 {
    oracle_answers(q).len() as u64
}

/// Sample mean, variance (unbiased), and the standard error of the variance
/// estimate from the fourth central moment.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub var: f64,
    pub var_se: f64,
}

impl Moments {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = values.into_iter().collect();
        let n = xs.len() as u64;
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Moments {
            n,
            mean,
            var,
            var_se: ((m4 - var * var).max(0.0) / n.max(1) as f64).sqrt(),
        }
    }

    pub fn se(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// `|mean − target|` in standard errors (0 when both are exact).
    pub fn z(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se()
        }
    }
}

/// Pearson statistic of `counts` against equal expected frequencies.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

pub fn chi_square_quantile(df: usize, p: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(p)
}

/// Frequencies of sampled answers keyed by tuple.
pub fn tally(samples: impl IntoIterator<Item = Vec<Value>>) -> BTreeMap<Vec<Value>, u64> {
    let mut m = BTreeMap::new();
    for s in samples {
        *m.entry(s).or_insert(0) += 1;
    }
    m
}

/// Single-relation graph patterns for the component samplers.
pub const GRAPH_SHAPES: &[(&str, &str)] = &[
    ("triangle", "E(A,B), E(B,C), E(C,A)"),
    ("pentagon", "E(A,B), E(B,C), E(C,D), E(D,F), E(F,A)"),
    ("star", "E(A,B), E(A,C), E(A,D)"),
    ("path", "E(A,B), E(B,C), E(C,D)"),
    ("triangle-tail", "E(A,B), E(B,C), E(C,A), E(C,D), E(D,F)"),
    ("bowtie", "E(A,B), E(B,C), E(C,A), E(D,F), E(F,G), E(G,D)"),
];

pub fn graph_db(seed: u64, edges: usize, vertices: u32) -> Database {
    let mut db = Database::new();
    add(&mut db, "E", &["s", "t"], &random_graph(&mut rng(seed), edges, vertices, true));
    db
}

/// Answers whose every cycle has its smallest `(degree, id)` value at the
/// first cycle vertex, with degrees read straight off the rows.
pub fn canonical_answers(q: &Query, db: &Database, plan: &[Component]) -> Vec<Vec<Value>> {
    let mut degree: BTreeMap<Value, u64> = BTreeMap::new();
    for row in db.get("E").unwrap().rows() {
        *degree.entry(row[0]).or_insert(0) += 1;
    }
    let key = |x: Value| (degree.get(&x).copied().unwrap_or(0), x);
    oracle_answers(q)
        .into_iter()
        .filter(|t| {
            plan.iter().all(|c| match c {
                Component::OddCycle { vertices, .. } => {
                    vertices.iter().all(|&v| key(t[vertices[0]]) <= key(t[v]))
                }
                Component::Star { .. } => true,
            })
        })
        .collect()
}

/// A random hypergraph query over fresh relations `R0, R1, …` of random
/// arity and size in which every attribute lies in some edge.
pub fn random_hypergraph(rng: &mut impl Rng, max_vars: usize, max_edges: usize) -> (Database, String) {
    let n = rng.random_range(2..=max_vars);
    let m = rng.random_range(1..=max_edges);
    let mut edges: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let k = rng.random_range(1..=3.min(n));
            let mut e: Vec<usize> = Vec::new();
            while e.len() < k {
                let v = rng.random_range(0..n);
                if !e.contains(&v) {
                    e.push(v);
                }
            }
            e
        })
        .collect();
    for v in 0..n {
        if !edges.iter().any(|e| e.contains(&v)) {
            let f = rng.random_range(0..m);
            edges[f].push(v);
        }
    }
    let name = |v: usize| char::from(b'A' + v as u8).to_string();
    let mut db = Database::new();
    let mut atoms = Vec::new();
    for (f, e) in edges.iter_mut().enumerate() {
        e.sort_unstable();
        let size = rng.random_range(1..=24);
        let rows: BTreeSet<Vec<Value>> = random_rows(rng, e.len(), size, 5).into_iter().collect();
        let schema: Vec<String> = (0..e.len()).map(|i| format!("c{i}")).collect();
        let schema: Vec<&str> = schema.iter().map(String::as_str).collect();
        add(&mut db, &format!("R{f}"), &schema, &rows.into_iter().collect::<Vec<_>>());
        let vars: Vec<String> = e.iter().map(|&v| name(v)).collect();
        atoms.push(format!("R{f}({})", vars.join(",")));
    }
    (db, atoms.join(", "))
}

/// Fractional edge cover LP solved by enumerating basic solutions: every
/// choice of `m` linearly independent tight constraints among
/// `Σ_{F ∋ v} x_F ≥ 1`, `x_F ≥ 0` and `x_F ≤ 1` that is feasible. Returns the
/// vertex minimizing `Σ x_F ln sizes[F]`, ties broken by the smallest weight
/// vector in lexicographic order.
pub fn lp_by_vertices(edges: &[Vec<usize>], n_vars: usize, sizes: &[u64]) -> Vec<BigRational> {
    let m = edges.len();
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    // Rows `a · x ≥ b`.
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for v in 0..n_vars {
        rows.push(((0..m).map(|f| int(edges[f].contains(&v) as i64)).collect(), int(1)));
    }
    for f in 0..m {
        rows.push(((0..m).map(|g| int((g == f) as i64)).collect(), int(0)));
        rows.push(((0..m).map(|g| int(-((g == f) as i64))).collect(), int(-1)));
    }
    let mut best: Option<Vec<BigRational>> = None;
    for mask in 0u32..(1 << rows.len()) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let chosen: Vec<&(Vec<BigRational>, BigRational)> =
            (0..rows.len()).filter(|i| mask >> i & 1 == 1).map(|i| &rows[i]).collect();
        let Some(x) = solve_square(&chosen) else { continue };
        let feasible = rows.iter().all(|(a, b)| {
            let lhs: BigRational = a.iter().zip(&x).map(|(p, q)| p * q).sum();
            lhs >= *b
        });
        if !feasible {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => match compare_log_objective(&x, b, sizes) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => x < *b,
            },
        };
        if better {
            best = Some(x);
        }
    }
    best.expect("the cover polytope has a vertex")
}

/// Gauss–Jordan on the system `a · x = b`; `None` if singular.
fn solve_square(rows: &[&(Vec<BigRational>, BigRational)]) -> Option<Vec<BigRational>> {
    let m = rows.len();
    let mut t: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|(a, b)| a.iter().cloned().chain([b.clone()]).collect())
        .collect();
    for c in 0..m {
        let p = (c..m).find(|&r| !t[r][c].is_zero())?;
        t.swap(c, p);
        let lead = t[c][c].clone();
        for v in t[c].iter_mut() {
            *v /= &lead;
        }
        for r in 0..m {
            if r != c && !t[r][c].is_zero() {
                let f = t[r][c].clone();
                let pivot = t[c].clone();
                for (v, pv) in t[r].iter_mut().zip(pivot) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(t.into_iter().map(|row| row[m].clone()).collect())
}

/// Exact comparison of `Π sizes^x` against `Π sizes^y`.
pub fn compare_log_objective(x: &[BigRational], y: &[BigRational], sizes: &[u64]) -> Ordering {
    let diff: Vec<BigRational> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let d = diff.iter().fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
    let (mut lhs, mut rhs) = (BigInt::from(1), BigInt::from(1));
    for (q, &n) in diff.iter().zip(sizes) {
        let e = (q * BigRational::from_integer(d.clone())).to_integer();
        let k: u32 = e.magnitude().try_into().expect("small exponent");
        if e.is_positive() {
            lhs *= BigInt::from(n).pow(k);
        } else {
            rhs *= BigInt::from(n).pow(k);
        }
    }
    lhs.cmp(&rhs)
}

/// Exact comparison of `Π sizes^x` against the integer `out`.
pub fn compare_product_with(x: &[BigRational], sizes: &[u64], out: u64) -> Ordering {
    let d = x.iter().fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
    let k: u32 = d.magnitude().try_into().expect("small denominator");
    let mut lhs = BigInt::from(1);
    for (q, &n) in x.iter().zip(sizes) {
        let e: u32 = (q * BigRational::from_integer(d.clone())).to_integer().magnitude().try_into().unwrap();
        lhs *= BigInt::from(n).pow(e);
    }
    lhs.cmp(&BigInt::from(out).pow(k))
}

/// Both sides of the sub-query sum inequality for a cover `x` and a split
/// `I | J` of the attributes: `Σ_{s ∈ ⋈_{F ∈ ℰ_I} π_I R_F} Π_{F ∈ ℰ_J}
/// |R_F ⋉ s|^{x_F}` and `Π_F |R_F|^{x_F}`.
pub fn subquery_sum(q: &Query, x: &[f64], i: VarSet) -> (f64, f64) {
    let j = q.scope().minus(i);
    let prefixes = joinest::wcoj::generic_join(q, i, &Binding::new(q.n_vars()));
    let lhs = prefixes.iter().map(|t| residual_product(q, x, j, &Binding::from_pairs(q.n_vars(), i.iter().zip(t.iter().copied())))).sum();
    (lhs, full_product(q, x))
}

/// The single-attribute variant: the sum runs over `π_A R_F` for the edge
/// `F ∋ A` with the fewest distinct `A` values.
pub fn single_attribute_sum(q: &Query, x: &[f64], a: Var) -> (f64, f64) {
    let j = q.scope().minus(VarSet::single(a));
    let empty = Binding::new(q.n_vars());
    let f = q
        .edges_meeting(VarSet::single(a))
        .min_by_key(|&f| q.atom(f).values(&empty, a).len())
        .expect("attribute is covered");
    let lhs = q
        .atom(f)
        .values(&empty, a)
        .into_iter()
        .map(|v| residual_product(q, x, j, &Binding::from_pairs(q.n_vars(), [(a, v)])))
        .sum();
    (lhs, full_product(q, x))
}

fn residual_product(q: &Query, x: &[f64], j: VarSet, s: &Binding) -> f64 {
    q.edges_meeting(j).map(|f| (q.atom(f).count(s) as f64).powf(x[f])).product()
}

fn full_product(q: &Query, x: &[f64]) -> f64 {
    q.atoms().iter().zip(x).map(|(a, &w)| (a.relation().len() as f64).powf(w)).product()
}

/// A random feasible fractional cover: uniform weights, raised to cover
/// whichever attributes they missed.
pub fn random_cover(q: &Query, rng: &mut impl Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..q.atoms().len()).map(|_| rng.random::<f64>()).collect();
    for v in q.scope().iter() {
        let edges: Vec<usize> = q.edges_meeting(VarSet::single(v)).collect();
        let sum: f64 = edges.iter().map(|&f| x[f]).sum();
        if sum < 1.0 {
            let f = edges[rng.random_range(0..edges.len())];
            x[f] = (x[f] + 1.0 - sum).min(1.0);
        }
    }
    x
}

/// Every nonempty proper subset of the query's attributes.
pub fn proper_subsets(q: &Query) -> Vec<VarSet> {
    let n = q.n_vars();
    (1u64..(1 << n) - 1)
        .map(|m| {
            let mut s = VarSet::EMPTY;
            (0..n).filter(|v| m >> v & 1 == 1).for_each(|v| s.insert(v));
            s
        })
        .collect()
}

/// Query, projection, and whether `Q_O` falls apart into components.
pub const PROJECTION_FIXTURES: &[(&str, &[&str], bool)] = &[
    ("R(A,B), S(B,C), T(C,D)", &["A", "C"], true),
    ("R(A,B), S(B,C), T(C,D)", &["A", "B"], false),
    ("R(A,B), S(B,C), T(A,C)", &["A", "B"], false),
    ("R(A,B), S(A,C), T(A,D)", &["B", "C"], true),
    // Most pairs drawn from π_A(R) × π_C(U) have no B joining them.
    ("R(A,B), U(B,C)", &["A", "C"], true),
];

pub fn projection_db() -> Database {
    let mut r = rng(11);
    let mut db = Database::new();
    for name in ["R", "S", "T"] {
        add(&mut db, name, &["x", "y"], &random_rows(&mut r, 2, 14, 5));
    }
    // U connects only through one B value.
    let mut u: Vec<Vec<Value>> = (1..=5).map(|c| vec![9, c]).collect();
    u.push(vec![1, 1]);
    add(&mut db, "U", &["x", "y"], &u);
    db
}

/// `π_O(Q)` by nested loops.
pub fn oracle_projection(q: &Query, o: VarSet) -> Vec<Vec<Value>> {
    let pos: Vec<usize> = {
        let all: Vec<_> = q.scope().iter().collect();
        o.iter().map(|v| all.iter().position(|&x| x == v).unwrap()).collect()
    };
    let set: BTreeSet<Vec<Value>> = brute_force_join(q)
        .into_iter()
        .map(|t| pos.iter().map(|&p| t[p]).collect())
        .collect();
    set.into_iter().collect()
}
