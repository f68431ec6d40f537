use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rand::Rng;

use super::{Binding, Var, VarSet};
use crate::store::{Prefix, Relation, TrieIndex, Value};

/// One hyperedge: a relation whose columns are bound to query attributes.
///
/// Columns mapped to `None` are projected away; such an atom stands for the
/// set `π_F(R)` and counts distinct tuples. An atom with every column bound
/// keeps the relation's bag semantics and counts rows with multiplicity.
pub struct Atom {
    relation: Arc<Relation>,
    cols: Vec<Option<Var>>,
    vars: VarSet,
    projected: bool,
    /// Index per (bound attributes, next attributes) combination.
    cache: RwLock<HashMap<(u64, u64), Arc<TrieIndex>>>,
}

impl Clone for Atom {
    fn clone(&self) -> Self {
        Atom::with_cols(self.relation.clone(), self.cols.clone())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.relation.name(), self.cols)
    }
}

impl Atom {
    /// Binds column `i` of `relation` to attribute `vars[i]`.
    pub fn new(relation: Arc<Relation>, vars: Vec<Var>) -> Self {
        Atom::with_cols(relation, vars.into_iter().map(Some).collect())
    }

    pub fn with_cols(relation: Arc<Relation>, cols: Vec<Option<Var>>) -> Self {
        assert_eq!(cols.len(), relation.arity(), "one entry per column");
        Atom {
            vars: cols.iter().flatten().copied().collect(),
            projected: cols.iter().any(Option::is_none),
            relation,
            cols,
            cache: RwLock::default(),
        }
    }

    /// `π_keep` of this atom.
    pub fn project_onto(&self, keep: VarSet) -> Atom {
        let cols = self.cols.iter().map(|c| c.filter(|&v| keep.contains(v))).collect();
        Atom::with_cols(self.relation.clone(), cols)
    }

    pub fn relation(&self) -> &Arc<Relation> {
        &self.relation
    }

    pub fn cols(&self) -> &[Option<Var>] {
        &self.cols
    }

    /// The attribute set `F`.
    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn is_projected(&self) -> bool {
        self.projected
    }

    /// Column holding attribute `v`.
    pub fn col_of(&self, v: Var) -> Option<usize> {
        self.cols.iter().position(|&c| c == Some(v))
    }

    /// Index ordered as: columns of `bound`, columns of `next`, the other
    /// attribute columns, then projected-away columns; schema order within
    /// each group.
    pub fn index_for(&self, bound: VarSet, next: VarSet) -> Arc<TrieIndex> {
        let key = (bound.0, next.0);
        if let Some(ix) = self.cache.read().expect("atom cache").get(&key) {
            return ix.clone();
        }
        let rank = |c: &Option<Var>| match *c {
            Some(v) if bound.contains(v) => 0,
            Some(v) if next.contains(v) => 1,
            Some(_) => 2,
            None => 3,
        };
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        order.sort_by_key(|&c| rank(&self.cols[c]));
        let ix = self.relation.index(&order).expect("order is a permutation");
        self.cache.write().expect("atom cache").insert(key, ix.clone());
        ix
    }

    /// Follows the values of `s` on the first `depth` levels of `ix`.
    fn seek(&self, ix: &TrieIndex, s: &Binding, depth: usize) -> Option<Prefix> {
        let mut p = ix.root();
        for &c in &ix.order()[..depth] {
            let v = self.cols[c].expect("bound column carries an attribute");
            p = ix.child(p, s.at(v))?;
        }
        Some(p)
    }

    fn tail(&self, bound: VarSet) -> usize {
        self.vars.len() - bound.len()
    }

    /// `|R_F ⋉ s|`: rows with multiplicity, or distinct tuples if projected.
    pub fn count(&self, s: &Binding) -> u64 {
        let b = s.bound().inter(self.vars);
        let ix = self.index_for(b, VarSet::EMPTY);
        match self.seek(&ix, s, b.len()) {
            None => 0,
            Some(p) if self.projected => ix.distinct(p, self.tail(b)),
            Some(p) => ix.count(p),
        }
    }

    /// True when some tuple of the atom agrees with `s`.
    pub fn contains(&self, s: &Binding) -> bool {
        let b = s.bound().inter(self.vars);
        let ix = self.index_for(b, VarSet::EMPTY);
        self.seek(&ix, s, b.len())
            .is_some_and(|p| !b.is_empty() || ix.count(p) > 0)
    }

    /// `|π_I(R_F ⋉ s)|`, distinct.
    pub fn distinct(&self, s: &Binding, vars: VarSet) -> u64 {
        let b = s.bound().inter(self.vars);
        let t = vars.inter(self.vars).minus(b);
        let ix = self.index_for(b, t);
        self.seek(&ix, s, b.len()).map_or(0, |p| ix.distinct(p, t.len()))
    }

    /// Calls `f` on each distinct value of `v` in `π_v(R_F ⋉ s)`, ascending.
    pub fn for_each_value(&self, s: &Binding, v: Var, mut f: impl FnMut(Value)) {
        let b = s.bound().inter(self.vars);
        let ix = self.index_for(b, VarSet::single(v));
        if let Some(p) = self.seek(&ix, s, b.len()) {
            ix.for_each_distinct(p, 1, |x| f(x[0]));
        }
    }

    /// Distinct values of `v` under `s`, ascending.
    pub fn values(&self, s: &Binding, v: Var) -> Vec<Value> {
        let mut out = Vec::new();
        self.for_each_value(s, v, |x| out.push(x));
        out
    }

    /// `i`-th distinct value of `v` under `s`.
    pub fn nth_value(&self, s: &Binding, v: Var, i: u64) -> Option<Value> {
        let b = s.bound().inter(self.vars);
        let ix = self.index_for(b, VarSet::single(v));
        let p = self.seek(&ix, s, b.len())?;
        let mut out = [0];
        ix.nth_distinct(p, 1, i, &mut out).ok()?;
        Some(out[0])
    }

    /// Draws a tuple of `R_F ⋉ s` (row-weighted, or uniform over distinct
    /// tuples if projected) and hands `f` the values of the attributes in
    /// `vars`, in index order, together with those attributes.
    fn sample_with<R: Rng + ?Sized, T>(
        &self,
        s: &Binding,
        vars: VarSet,
        rng: &mut R,
        f: impl FnOnce(&TrieIndex, &[Option<Var>], &[Value], usize) -> T,
    ) -> Option<T> {
        let b = s.bound().inter(self.vars);
        let t = vars.inter(self.vars).minus(b);
        let ix = self.index_for(b, t);
        let p = self.seek(&ix, s, b.len())?;
        let tail = self.tail(b);
        let mut buf = [0 as Value; 16];
        let mut heap;
        let vals: &mut [Value] = if ix.arity() <= buf.len() {
            &mut buf[..]
        } else {
            heap = vec![0; ix.arity()];
            &mut heap[..]
        };
        let ok = if tail == 0 {
            ix.count(p) > 0
        } else if self.projected {
            ix.sample_distinct(p, tail, rng, vals)
        } else {
            ix.sample_below(p, rng, vals)
        };
        ok.then(|| f(&ix, &self.cols, vals, b.len()))
    }

    /// Draws a tuple of `R_F ⋉ s` (row-weighted, or uniform over distinct
    /// tuples if projected) and writes its values for `vars` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        s: &Binding,
        vars: VarSet,
        rng: &mut R,
        out: &mut Binding,
    ) -> bool {
        let t = vars.inter(self.vars).minus(s.bound());
        self.sample_with(s, vars, rng, |ix, cols, vals, depth| {
            for (i, &c) in ix.order()[depth..depth + t.len()].iter().enumerate() {
                out.set(cols[c].expect("attribute column"), vals[i]);
            }
        })
        .is_some()
    }

    /// Like [`Atom::sample_into`] for a single unbound attribute.
    pub fn sample_value<R: Rng + ?Sized>(&self, s: &Binding, v: Var, rng: &mut R) -> Option<Value> {
        debug_assert!(!s.bound().contains(v));
        self.sample_with(s, VarSet::single(v), rng, |_, _, vals, _| vals[0])
    }

    /// Tuples of the atom over its attributes (ascending attribute order),
    /// deduplicated when projected.
    pub fn tuples(&self) -> Vec<Vec<Value>> {
        let order: Vec<(Var, usize)> = {
            let mut o: Vec<(Var, usize)> = self
                .cols
                .iter()
                .enumerate()
                .filter_map(|(c, v)| v.map(|v| (v, c)))
                .collect();
            o.sort_unstable();
            o
        };
        let mut out: Vec<Vec<Value>> = self
            .relation
            .rows()
            .map(|r| order.iter().map(|&(_, c)| r[c]).collect())
            .collect();
        if self.projected {
            out.sort_unstable();
            out.dedup();
        }
        out
    }
}
