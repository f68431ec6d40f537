//! Generalized hypertree decompositions: validation, enumeration and
//! fractional hypertree width, plus the estimation path over a GHD.

mod annotated;
mod estimate;

use std::collections::{BTreeSet, HashMap};

pub use annotated::{simple_aggro_yannakakis, AnnotatedRelation};
pub use estimate::{ghd_card_est, group_by_card_est, GhdConfig, GhdEstimate, GhdEstimator, NodeReport};

use crate::error::{Error, Result};
use crate::query::{fractional_edge_cover_for, GhdNodeSpec, GhdSpec, Query, Var, VarSet};

/// A tree of attribute bags, rooted at node 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ghd {
    bags: Vec<VarSet>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
}

impl Ghd {
    /// Builds the tree from bags and undirected tree edges; node 0 is the
    /// root.
    pub fn new(bags: Vec<VarSet>, edges: &[[usize; 2]]) -> Result<Self> {
        let n = bags.len();
        if n == 0 {
            return Err(Error::InvalidGhd("a GHD needs at least one node".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidGhd(format!("{n} nodes need {} tree edges, got {}", n - 1, edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for &[a, b] in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidGhd(format!("bad tree edge [{a}, {b}]")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(t);
                    depth[u] = depth[t] + 1;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGhd("tree edges do not connect all nodes".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (t, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(t);
            }
        }
        Ok(Ghd {
            bags,
            parent,
            children,
            depth,
        })
    }

    /// The one-bag decomposition `χ = 𝒱`.
    pub fn single(query: &Query) -> Self {
        Ghd::new(vec![query.scope()], &[]).expect("one node")
    }

    /// Reads a GHD from its query-file form; node ids map to positions by
    /// ascending id, and the smallest id becomes the root.
    pub fn from_spec(spec: &GhdSpec, query: &Query) -> Result<Self> {
        let mut nodes: Vec<&GhdNodeSpec> = spec.nodes.iter().collect();
        nodes.sort_by_key(|n| n.id);
        let pos: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        if pos.len() != nodes.len() {
            return Err(Error::InvalidGhd("duplicate node id".into()));
        }
        let bags = nodes
            .iter()
            .map(|n| {
                let names: Vec<&str> = n.bag.iter().map(String::as_str).collect();
                query.vars(&names).map_err(|e| Error::InvalidGhd(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = spec
            .edges
            .iter()
            .map(|&[a, b]| match (pos.get(&a), pos.get(&b)) {
                (Some(&a), Some(&b)) => Ok([a, b]),
                _ => Err(Error::InvalidGhd(format!("tree edge [{a}, {b}] names an unknown node"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let ghd = Ghd::new(bags, &edges)?;
        ghd.validate(query)?;
        Ok(ghd)
    }

    pub fn to_spec(&self, query: &Query) -> GhdSpec {
        GhdSpec {
            nodes: self
                .bags
                .iter()
                .enumerate()
                .map(|(id, &b)| GhdNodeSpec {
                    id,
                    bag: query.names(b).into_iter().map(String::from).collect(),
                })
                .collect(),
            edges: self.tree_edges(),
        }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn bag(&self, t: usize) -> VarSet {
        self.bags[t]
    }

    pub fn bags(&self) -> &[VarSet] {
        &self.bags
    }

    /// Parent of `t`; `None` for the root, whose parent is the virtual node
    /// with the empty bag.
    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parent[t]
    }

    pub fn children(&self, t: usize) -> &[usize] {
        &self.children[t]
    }

    pub fn tree_edges(&self) -> Vec<[usize; 2]> {
        (0..self.len()).filter_map(|t| self.parent[t].map(|p| [p, t])).collect()
    }

    /// Children before parents: deepest first, ties by node id.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&t| (std::cmp::Reverse(self.depth[t]), t));
        order
    }

    pub fn top_down(&self) -> Vec<usize> {
        let mut order = self.bottom_up();
        order.reverse();
        order
    }

    /// `G(t)`: attributes of `t` shared with some other node.
    pub fn grouping(&self, t: usize) -> VarSet {
        let others = (0..self.len()).filter(|&u| u != t).fold(VarSet::EMPTY, |s, u| s.union(self.bags[u]));
        self.bags[t].inter(others)
    }

    /// `TOP(v)`: the node closest to the root whose bag holds `v`.
    pub fn top(&self, v: Var) -> Option<usize> {
        (0..self.len()).filter(|&t| self.bags[t].contains(v)).min_by_key(|&t| (self.depth[t], t))
    }

    /// The GHD conditions: every edge inside some bag, every attribute's
    /// nodes a nonempty connected subtree, and no bag outside the scope.
    pub fn validate(&self, query: &Query) -> Result<()> {
        let scope = query.scope();
        for (t, b) in self.bags.iter().enumerate() {
            if !b.is_subset(scope) {
                return Err(Error::InvalidGhd(format!("bag {t} holds attributes outside the query")));
            }
        }
        for (e, a) in query.atoms().iter().enumerate() {
            if !self.bags.iter().any(|b| a.vars().is_subset(*b)) {
                return Err(Error::InvalidGhd(format!("edge {e} lies in no bag")));
            }
        }
        for v in scope.iter() {
            let holding: Vec<usize> = (0..self.len()).filter(|&t| self.bags[t].contains(v)).collect();
            if holding.is_empty() {
                return Err(Error::InvalidGhd(format!("attribute {} lies in no bag", query.attrs()[v])));
            }
            // Connected iff exactly one holder has its parent outside.
            let roots = holding
                .iter()
                .filter(|&&t| self.parent[t].is_none_or(|p| !self.bags[p].contains(v)))
                .count();
            if roots != 1 {
                return Err(Error::InvalidGhd(format!(
                    "bags holding {} are not connected",
                    query.attrs()[v]
                )));
            }
        }
        Ok(())
    }

    /// `ρ(ℋ_χ(t))` for every node under `sizes`.
    pub fn node_widths(&self, query: &Query, sizes: &[u64]) -> Vec<f64> {
        let base = sizes.iter().copied().max().unwrap_or(0);
        self.bags.iter().map(|&b| bag_width(query, b, sizes, base)).collect()
    }

    /// `fhtw(𝒯, ℋ) = max_t ρ(ℋ_χ(t))`.
    pub fn width(&self, query: &Query, sizes: &[u64]) -> f64 {
        self.node_widths(query, sizes).into_iter().fold(0.0, f64::max)
    }

    /// Canonical form: sorted bags and sorted bag-pair edges.
    fn signature(&self) -> (Vec<u64>, Vec<(u64, u64)>) {
        let mut bags: Vec<u64> = self.bags.iter().map(|b| b.0).collect();
        bags.sort_unstable();
        let mut edges: Vec<(u64, u64)> = self
            .tree_edges()
            .into_iter()
            .map(|[a, b]| {
                let (x, y) = (self.bags[a].0, self.bags[b].0);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        (bags, edges)
    }
}

/// `ρ` of the bag's induced query, each projected edge keeping its original
/// size, in logarithms base `base` (the query's `IN`).
fn bag_width(query: &Query, bag: VarSet, sizes: &[u64], base: u64) -> f64 {
    let sub = query.induced(bag);
    let kept: Vec<u64> = query.edges_meeting(bag).map(|e| sizes[e]).collect();
    let cover = fractional_edge_cover_for(&sub, &kept);
    if base <= 1 {
        return num_traits::ToPrimitive::to_f64(&cover.total_weight()).unwrap_or(0.0);
    }
    cover.agm().ln() / (base as f64).ln()
}

/// Largest attribute count for which every elimination ordering is tried;
/// beyond it a handful of greedy orderings are used.
pub const EXHAUSTIVE_VARS: usize = 8;

/// Distinct GHDs of the query, always including the single node.
///
/// Candidates come from elimination orderings of the primal graph: each
/// ordering yields a tree decomposition whose bags are an attribute with
/// its later neighbours; bags contained in a neighbour are merged away.
/// Every ordering is tried up to [`EXHAUSTIVE_VARS`] attributes, and some
/// optimal-width decomposition always arises this way.
pub fn enumerate_ghds(query: &Query) -> Vec<Ghd> {
    let vars: Vec<Var> = query.scope().iter().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |g: Ghd| {
        if seen.insert(g.signature()) {
            out.push(g);
        }
    };
    push(Ghd::single(query));
    if vars.len() <= EXHAUSTIVE_VARS {
        let mut order = Vec::with_capacity(vars.len());
        let mut used = vec![false; vars.len()];
        permute(&vars, &mut used, &mut order, &mut |o| push(from_elimination(query, o)));
    } else {
        let mut o = crate::estimators::elimination_order(query, query.scope());
        o.reverse();
        push(from_elimination(query, &o));
        push(from_elimination(query, &vars));
        let rev: Vec<Var> = vars.iter().rev().copied().collect();
        push(from_elimination(query, &rev));
    }
    out
}

fn permute(vars: &[Var], used: &mut [bool], order: &mut Vec<Var>, f: &mut impl FnMut(&[Var])) {
    if order.len() == vars.len() {
        f(order);
        return;
    }
    for i in 0..vars.len() {
        if !used[i] {
            used[i] = true;
            order.push(vars[i]);
            permute(vars, used, order, f);
            order.pop();
            used[i] = false;
        }
    }
}

/// Tree decomposition from eliminating `order` front to back.
fn from_elimination(query: &Query, order: &[Var]) -> Ghd {
    let n = query.n_vars();
    let mut adj = vec![VarSet::EMPTY; n];
    for a in query.atoms() {
        for v in a.vars().iter() {
            adj[v] = adj[v].union(a.vars());
        }
    }
    for (v, s) in adj.iter_mut().enumerate() {
        s.remove(v);
    }
    let pos: HashMap<Var, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut bags = Vec::with_capacity(order.len());
    let mut alive = query.scope();
    for &v in order {
        let nb = adj[v].inter(alive);
        bags.push(nb.union(VarSet::single(v)));
        for u in nb.iter() {
            adj[u] = adj[u].union(nb);
            adj[u].remove(u);
        }
        alive.remove(v);
    }
    // Bag i hangs under the bag of its earliest-eliminated later neighbour.
    let mut parent: Vec<Option<usize>> = (0..order.len())
        .map(|i| bags[i].iter().filter(|&u| u != order[i]).map(|u| pos[&u]).min())
        .collect();
    // Merge bags contained in their parent (or a child), until none is.
    let mut live: Vec<bool> = vec![true; order.len()];
    loop {
        let mut changed = false;
        for i in 0..order.len() {
            if !live[i] {
                continue;
            }
            let target = parent[i].filter(|&p| bags[i].is_subset(bags[p])).or_else(|| {
                (0..order.len()).find(|&c| live[c] && parent[c] == Some(i) && bags[i].is_subset(bags[c]))
            });
            if let Some(t) = target {
                // Absorb i into t: i's other neighbours reattach to t.
                for c in 0..order.len() {
                    if live[c] && c != t && parent[c] == Some(i) {
                        parent[c] = Some(t);
                    }
                }
                if parent[t] == Some(i) {
                    parent[t] = parent[i];
                }
                live[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let index: Vec<Option<usize>> = {
        let mut k = 0;
        live.iter()
            .map(|&l| {
                l.then(|| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let kept: Vec<usize> = (0..order.len()).filter(|&i| live[i]).collect();
    // Root at the last kept bag so that node 0 is a stable choice.
    let mut kept_bags: Vec<VarSet> = kept.iter().map(|&i| bags[i]).collect();
    let mut edges: Vec<[usize; 2]> = kept
        .iter()
        .filter_map(|&i| parent[i].map(|p| [index[p].unwrap(), index[i].unwrap()]))
        .collect();
    // A disconnected query leaves a forest; the pieces share no attribute,
    // so any linking keeps the tree valid.
    let roots: Vec<usize> = kept.iter().filter(|&&i| parent[i].is_none()).map(|&i| index[i].unwrap()).collect();
    for &r in &roots[1..] {
        edges.push([roots[0], r]);
    }
    let root = kept_bags.len() - 1;
    kept_bags.swap(0, root);
    let relabel = |x: usize| if x == 0 { root } else if x == root { 0 } else { x };
    for e in &mut edges {
        *e = [relabel(e[0]), relabel(e[1])];
    }
    Ghd::new(kept_bags, &edges).expect("elimination yields a tree")
}

/// `fhtw(ℋ)` under `sizes` with a decomposition attaining it. Ties go to
/// fewer nodes, then to enumeration order.
pub fn fhtw(query: &Query, sizes: &[u64]) -> (Ghd, f64) {
    let base = sizes.iter().copied().max().unwrap_or(0);
    let mut cache: HashMap<VarSet, f64> = HashMap::new();
    let mut best: Option<(Ghd, f64)> = None;
    for g in enumerate_ghds(query) {
        let w = g
            .bags()
            .iter()
            .map(|&b| *cache.entry(b).or_insert_with(|| bag_width(query, b, sizes, base)))
            .fold(0.0, f64::max);
        let better = match &best {
            None => true,
            Some((bg, bw)) => w < bw - 1e-9 || (w <= bw + 1e-9 && g.len() < bg.len()),
        };
        if better {
            best = Some((g, w));
        }
    }
    best.expect("the single node is always enumerated")
}
