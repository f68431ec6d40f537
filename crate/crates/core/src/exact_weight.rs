//! Exact uniform sampling over acyclic joins.
//!
//! Every atom becomes a node of a join tree whose bag keeps only the atom's
//! join attributes; attributes private to one atom are filled in at the end
//! by a uniform row of that atom. Weights are computed bottom-up once, then
//! each sample is a top-down weighted descent plus those replacements, and
//! every answer (with multiplicity, as a combination of rows) comes out with
//! probability exactly `1 / OUT`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ghd::Ghd;
use crate::query::{Binding, Query, VarSet};
use crate::store::Value;

/// Bottom-up sampling weights over a join tree with one node per atom.
#[derive(Clone, Debug)]
pub struct WeightTables {
    query: Query,
    tree: Ghd,
    nodes: Vec<NodeTable>,
    total: u64,
}

#[derive(Clone, Debug)]
struct NodeTable {
    /// Distinct tuples `g_t` of `π_χ(t) R_{F_t}`, over `χ(t)` ascending.
    tuples: Vec<Vec<Value>>,
    /// `W(g_t)`: `|R_{F_t} ⋉ g_t|` times the children's `W(g_t, R_c)`.
    weight: Vec<u64>,
    /// Attributes shared with the parent.
    key: VarSet,
    /// Parent key → indices of matching tuples and their cumulative weights;
    /// the last cumulative weight is `W(g_p, R_t)`.
    groups: HashMap<Vec<Value>, (Vec<usize>, Vec<u64>)>,
}

/// One sample with the exact probability of the path that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedSample {
    pub answer: Binding,
    /// `Π_t W(s_t) / W(s_p, R_t) · Π_t 1 / |R_{F_t} ⋉ s_t|`.
    pub probability: BigRational,
}

impl WeightTables {
    /// Builds the join tree and all weights. Cyclic queries, and projected
    /// atoms, are refused.
    pub fn new(query: &Query) -> Result<Self> {
        if query.atoms().iter().any(|a| a.is_projected()) {
            return Err(Error::Unsupported("exact weighting needs unprojected atoms".into()));
        }
        let m = query.atoms().len();
        let vars: Vec<VarSet> = query.atoms().iter().map(|a| a.vars()).collect();
        let shared = query
            .scope()
            .iter()
            .filter(|&v| vars.iter().filter(|f| f.contains(v)).count() > 1)
            .collect::<VarSet>();
        let bags: Vec<VarSet> = vars.iter().map(|f| f.inter(shared)).collect();
        let tree = Ghd::new(bags.clone(), &spanning_tree(&bags))?;
        for v in shared.iter() {
            let holding: Vec<usize> = (0..m).filter(|&t| bags[t].contains(v)).collect();
            let tops = holding
                .iter()
                .filter(|&&t| tree.parent(t).is_none_or(|p| !bags[p].contains(v)))
                .count();
            if tops != 1 {
                return Err(Error::Unsupported(format!(
                    "query is cyclic: no join tree keeps {} connected",
                    query.attrs()[v]
                )));
            }
        }
        let mut nodes: Vec<NodeTable> = (0..m)
            .map(|t| {
                let mut counts: HashMap<Vec<Value>, u64> = HashMap::new();
                let pos: Vec<usize> = {
                    let all: Vec<_> = vars[t].iter().collect();
                    bags[t].iter().map(|v| all.iter().position(|&x| x == v).unwrap()).collect()
                };
                for row in query.atom(t).tuples() {
                    *counts.entry(pos.iter().map(|&p| row[p]).collect()).or_insert(0) += 1;
                }
                let mut tuples: Vec<Vec<Value>> = counts.keys().cloned().collect();
                tuples.sort();
                let weight = tuples.iter().map(|g| counts[g]).collect();
                let key = tree.parent(t).map_or(VarSet::EMPTY, |p| bags[t].inter(bags[p]));
                NodeTable {
                    tuples,
                    weight,
                    key,
                    groups: HashMap::new(),
                }
            })
            .collect();
        for t in tree.bottom_up() {
            // Group t's tuples by the parent key; W(g_p, R_t) per key.
            let key_pos = positions(bags[t], nodes[t].key);
            let mut groups: HashMap<Vec<Value>, (Vec<usize>, Vec<u64>)> = HashMap::new();
            for (i, g) in nodes[t].tuples.iter().enumerate() {
                let w = nodes[t].weight[i];
                if w == 0 {
                    continue;
                }
                let entry = groups.entry(key_pos.iter().map(|&p| g[p]).collect()).or_default();
                let acc = entry.1.last().copied().unwrap_or(0).checked_add(w).ok_or(Error::Overflow)?;
                entry.0.push(i);
                entry.1.push(acc);
            }
            if let Some(p) = tree.parent(t) {
                let parent_pos = positions(bags[p], nodes[t].key);
                let parent = &mut nodes[p];
                for (i, g) in parent.tuples.iter().enumerate() {
                    let k: Vec<Value> = parent_pos.iter().map(|&q| g[q]).collect();
                    let below = groups.get(&k).map_or(0, |(_, c)| *c.last().unwrap());
                    parent.weight[i] = parent.weight[i].checked_mul(below).ok_or(Error::Overflow)?;
                }
            }
            nodes[t].groups = groups;
        }
        let root = &nodes[0];
        let total = root.groups.get(&Vec::new()).map_or(0, |(_, c)| *c.last().unwrap());
        Ok(WeightTables {
            query: query.clone(),
            tree,
            nodes,
            total,
        })
    }

    /// `W(g_pr) = OUT`, counting answers with row multiplicity.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The join tree; node `t` is atom `t`.
    pub fn tree(&self) -> &Ghd {
        &self.tree
    }

    /// `W(g_t)` after the bottom-up pass.
    pub fn weight(&self, t: usize, tuple: &[Value]) -> Option<u64> {
        let n = &self.nodes[t];
        n.tuples.binary_search_by(|g| g.as_slice().cmp(tuple)).ok().map(|i| n.weight[i])
    }

    /// `W(g_p, R_t)` for the key `g_p` restricts to on `χ(t) ∩ χ(p)`.
    pub fn child_weight(&self, t: usize, key: &[Value]) -> u64 {
        self.nodes[t].groups.get(key).map_or(0, |(_, c)| *c.last().unwrap())
    }

    /// One uniform answer.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Binding> {
        Ok(self.descend(rng, false)?.answer)
    }

    /// [`WeightTables::sample`] with the exact path probability.
    pub fn sample_traced<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TracedSample> {
        self.descend(rng, true)
    }

    fn descend<R: Rng + ?Sized>(&self, rng: &mut R, trace: bool) -> Result<TracedSample> {
        if self.total == 0 {
            return Err(Error::Empty);
        }
        let n = self.query.n_vars();
        let mut s = Binding::new(n);
        let mut p = BigRational::from_integer(BigInt::from(1));
        for t in self.tree.top_down() {
            let node = &self.nodes[t];
            let key = s.project(node.key);
            let (idx, cum) = &node.groups[&key];
            let total = *cum.last().unwrap();
            let u = rng.random_range(0..total);
            let j = cum.partition_point(|&c| c <= u);
            let i = idx[j];
            for (v, &x) in self.tree.bag(t).iter().zip(&node.tuples[i]) {
                s.set(v, x);
            }
            if trace {
                p *= BigRational::new(BigInt::from(node.weight[i]), BigInt::from(total));
            }
        }
        // Replace each s_t by a uniform row of R_{F_t} ⋉ s_t.
        let fixed = s.clone();
        for t in 0..self.nodes.len() {
            let atom = self.query.atom(t);
            let mut b = Binding::new(n);
            for v in self.tree.bag(t).iter() {
                b.set(v, fixed.at(v));
            }
            let rows = atom.count(&b);
            let ok = atom.sample_into(&b, atom.vars(), rng, &mut s);
            debug_assert!(ok, "weighted descent only reaches extendable tuples");
            if trace {
                p *= BigRational::new(BigInt::from(1), BigInt::from(rows));
            }
        }
        Ok(TracedSample {
            answer: s,
            probability: p,
        })
    }
}

/// Maximum-overlap spanning tree over the bags (Kruskal, ties by index),
/// linking components with empty-overlap edges.
fn spanning_tree(bags: &[VarSet]) -> Vec<[usize; 2]> {
    let m = bags.len();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            pairs.push((bags[a].inter(bags[b]).len(), a, b));
        }
    }
    pairs.sort_by_key(|&(w, a, b)| (std::cmp::Reverse(w), a, b));
    let mut comp: Vec<usize> = (0..m).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    let mut edges = Vec::new();
    for (_, a, b) in pairs {
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        if ra != rb {
            comp[ra] = rb;
            edges.push([a, b]);
        }
    }
    edges
}

fn positions(of: VarSet, vars: VarSet) -> Vec<usize> {
    let all: Vec<_> = of.iter().collect();
    vars.iter().map(|v| all.iter().position(|&x| x == v).expect("key inside bag")).collect()
}
