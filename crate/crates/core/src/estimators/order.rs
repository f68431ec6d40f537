use crate::query::{Query, Var, VarSet};

/// Sampling order for the attributes in `vars`: the reverse of a greedy
/// min-degree elimination of the primal graph (with fill-in), ties to the
/// lowest attribute id.
pub fn elimination_order(query: &Query, vars: VarSet) -> Vec<Var> {
    let n = query.n_vars();
    let mut adj = vec![VarSet::EMPTY; n];
    for a in query.atoms() {
        let f = a.vars().inter(vars);
        for v in f.iter() {
            adj[v] = adj[v].union(f.minus(VarSet::single(v)));
        }
    }
    let mut left = vars;
    let mut eliminated = Vec::with_capacity(vars.len());
    while let Some(v) = left.iter().min_by_key(|&v| (adj[v].inter(left).len(), v)) {
        let nb = adj[v].inter(left);
        for u in nb.iter() {
            adj[u] = adj[u].union(nb.minus(VarSet::single(u)));
        }
        left.remove(v);
        eliminated.push(v);
    }
    eliminated.reverse();
    eliminated
}

/// Edge order for random walks: start at edge 0, then always continue with
/// the lowest-id edge sharing an attribute with those already visited,
/// jumping to the lowest unvisited edge when the query is disconnected.
pub fn walk_order(query: &Query) -> Vec<usize> {
    let m = query.atoms().len();
    let mut seen = VarSet::EMPTY;
    let mut used = vec![false; m];
    let mut order = Vec::with_capacity(m);
    while order.len() < m {
        let next = (0..m)
            .find(|&e| !used[e] && query.atom(e).vars().meets(seen))
            .or_else(|| (0..m).find(|&e| !used[e]))
            .expect("an unused edge remains");
        used[next] = true;
        seen = seen.union(query.atom(next).vars());
        order.push(next);
    }
    order
}
