use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::lp::{lex_min_cover, log_sign};
use super::{Binding, Query, VarSet};

/// Weights `x_F ∈ [0, 1]` covering every attribute of a query, together with
/// the relation sizes they were optimized for.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalEdgeCover {
    weights: Vec<BigRational>,
    approx: Vec<f64>,
    sizes: Vec<u64>,
}

impl FractionalEdgeCover {
    pub fn new(weights: Vec<BigRational>, sizes: Vec<u64>) -> Self {
        assert_eq!(weights.len(), sizes.len());
        let approx = weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect();
        FractionalEdgeCover {
            weights,
            approx,
            sizes,
        }
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// `x_F` as a float, for the sampling hot paths.
    pub fn weight(&self, e: usize) -> f64 {
        self.approx[e]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// `Σ_{F ∋ v} x_F ≥ 1` for every attribute in the query's scope.
    pub fn is_feasible(&self, query: &Query) -> bool {
        let one = BigRational::from_integer(1.into());
        self.weights.iter().all(|w| *w >= BigRational::zero() && *w <= one)
            && query.scope().iter().all(|v| {
                let sum: BigRational = query
                    .edges_meeting(VarSet::single(v))
                    .map(|e| self.weights[e].clone())
                    .sum();
                sum >= one
            })
    }

    /// `Σ_F x_F`, the unweighted cover number.
    pub fn total_weight(&self) -> BigRational {
        self.weights.iter().cloned().sum()
    }

    /// `ρ = Σ_F x_F · log_IN |R_F|`; falls back to `Σ x_F` when `IN ≤ 1`.
    pub fn rho(&self) -> f64 {
        let input = self.sizes.iter().copied().max().unwrap_or(0);
        if input <= 1 {
            return self.total_weight().to_f64().unwrap_or(0.0);
        }
        self.agm().ln() / (input as f64).ln()
    }

    /// `Π_F |R_F|^{x_F}`.
    pub fn agm(&self) -> AgmValue {
        AgmValue::new(self.sizes.iter().copied().zip(self.weights.iter().cloned()).collect())
    }
}

/// A product `Π n_i^{q_i}` with rational exponents, kept exactly and as a
/// natural logarithm. A zero base makes the whole value zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AgmValue {
    factors: Vec<(u64, BigRational)>,
    ln: f64,
    zero: bool,
}

impl AgmValue {
    pub fn new(factors: Vec<(u64, BigRational)>) -> Self {
        let zero = factors.iter().any(|(n, _)| *n == 0);
        let ln = if zero {
            f64::NEG_INFINITY
        } else {
            factors
                .iter()
                .map(|(n, q)| q.to_f64().unwrap_or(0.0) * (*n as f64).ln())
                .sum()
        };
        AgmValue { factors, ln, zero }
    }

    pub fn one() -> Self {
        AgmValue::new(Vec::new())
    }

    pub fn factors(&self) -> &[(u64, BigRational)] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    /// Exact comparison with an integer, e.g. a join size.
    pub fn cmp_int(&self, n: u64) -> Ordering {
        if self.zero {
            return 0.cmp(&n);
        }
        if n == 0 {
            return Ordering::Greater;
        }
        let mut coefs: Vec<BigRational> = self.factors.iter().map(|(_, q)| q.clone()).collect();
        let mut sizes: Vec<u64> = self.factors.iter().map(|(b, _)| *b).collect();
        coefs.push(BigRational::from_integer((-1).into()));
        sizes.push(n);
        log_sign(&coefs, &sizes)
    }

    /// Exact comparison of two products.
    pub fn cmp_exact(&self, other: &AgmValue) -> Ordering {
        match (self.zero, other.zero) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let mut coefs: Vec<BigRational> = self.factors.iter().map(|(_, q)| q.clone()).collect();
        let mut sizes: Vec<u64> = self.factors.iter().map(|(b, _)| *b).collect();
        for (b, q) in &other.factors {
            coefs.push(-q.clone());
            sizes.push(*b);
        }
        log_sign(&coefs, &sizes)
    }
}

/// Optimal cover for the query's own relation sizes.
pub fn fractional_edge_cover(query: &Query) -> FractionalEdgeCover {
    fractional_edge_cover_for(query, &query.sizes())
}

/// Optimal cover of the query hypergraph for the given sizes `|R_F|`.
pub fn fractional_edge_cover_for(query: &Query, sizes: &[u64]) -> FractionalEdgeCover {
    let edges: Vec<VarSet> = query.atoms().iter().map(|a| a.vars()).collect();
    let weights = lex_min_cover(&edges, query.scope(), sizes);
    FractionalEdgeCover::new(weights, sizes.to_vec())
}

/// `AGM(ℋ) = Π_F |R_F|^{x_F}` for `cover`.
pub fn agm(cover: &FractionalEdgeCover) -> AgmValue {
    cover.agm()
}

/// `AGM(ℋ_s) = Π_{F ∈ ℰ_O} |R_F ⋉ s|^{x_F}` for the remaining attributes
/// `remaining`, using the cover of the original query.
pub fn residual_agm(cover: &FractionalEdgeCover, query: &Query, remaining: VarSet, s: &Binding) -> AgmValue {
    AgmValue::new(
        query
            .edges_meeting(remaining)
            .map(|e| (query.atom(e).count(s), cover.weights()[e].clone()))
            .collect(),
    )
}
