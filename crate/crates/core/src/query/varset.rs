use std::fmt;

use crate::store::Value;

/// Index of a query attribute.
pub type Var = usize;

/// Upper bound on attributes per query.
pub const MAX_VARS: usize = 64;

/// Set of query attributes as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn single(v: Var) -> Self {
        VarSet(1 << v)
    }

    /// `{0, 1, ..., n - 1}`.
    pub fn first(n: usize) -> Self {
        if n >= 64 {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: Var) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: Var) {
        self.0 &= !(1 << v);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: Self) -> Self {
        VarSet(self.0 | o.0)
    }

    pub fn inter(self, o: Self) -> Self {
        VarSet(self.0 & o.0)
    }

    pub fn minus(self, o: Self) -> Self {
        VarSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn meets(self, o: Self) -> bool {
        self.0 & o.0 != 0
    }

    /// Smallest member.
    pub fn min(self) -> Option<Var> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Var)
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let v = bits.trailing_zeros() as Var;
                bits &= bits - 1;
                v
            })
        })
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Partial assignment of values to query attributes: the cumulative sample
/// `s` of the estimators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    vals: Vec<Value>,
    mask: VarSet,
}

impl Binding {
    pub fn new(n_vars: usize) -> Self {
        Binding {
            vals: vec![0; n_vars],
            mask: VarSet::EMPTY,
        }
    }

    pub fn from_pairs(n_vars: usize, pairs: impl IntoIterator<Item = (Var, Value)>) -> Self {
        let mut b = Binding::new(n_vars);
        for (v, x) in pairs {
            b.set(v, x);
        }
        b
    }

    pub fn bound(&self) -> VarSet {
        self.mask
    }

    pub fn get(&self, v: Var) -> Option<Value> {
        self.mask.contains(v).then(|| self.vals[v])
    }

    /// Value of a variable known to be bound.
    pub fn at(&self, v: Var) -> Value {
        debug_assert!(self.mask.contains(v));
        self.vals[v]
    }

    pub fn set(&mut self, v: Var, x: Value) {
        self.vals[v] = x;
        self.mask.insert(v);
    }

    pub fn unset(&mut self, v: Var) {
        self.mask.remove(v);
    }

    pub fn unset_all(&mut self, vs: VarSet) {
        self.mask = self.mask.minus(vs);
    }

    pub fn n_vars(&self) -> usize {
        self.vals.len()
    }

    /// Values of `vars` in ascending attribute order.
    pub fn project(&self, vars: VarSet) -> Vec<Value> {
        vars.iter().map(|v| self.at(v)).collect()
    }

    /// Values of all bound attributes in ascending attribute order.
    pub fn values(&self) -> Vec<Value> {
        self.project(self.mask)
    }
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.mask.iter().map(|v| (v, self.vals[v]))).finish()
    }
}
