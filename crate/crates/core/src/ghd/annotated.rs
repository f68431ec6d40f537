use std::collections::{BTreeMap, BTreeSet};

use super::Ghd;
use crate::error::{Error, Result};
use crate::query::VarSet;
use crate::store::Value;

/// A relation whose tuples carry non-negative annotations; joins multiply
/// them and aggregation sums them. Tuples list the schema's attributes in
/// ascending order and are never duplicated.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedRelation {
    schema: VarSet,
    rows: BTreeMap<Vec<Value>, f64>,
}

impl AnnotatedRelation {
    pub fn new(schema: VarSet) -> Self {
        AnnotatedRelation {
            schema,
            rows: BTreeMap::new(),
        }
    }

    /// The nullary relation `{((), a)}`.
    pub fn scalar(a: f64) -> Self {
        let mut r = AnnotatedRelation::new(VarSet::EMPTY);
        r.insert(Vec::new(), a);
        r
    }

    pub fn from_rows(schema: VarSet, rows: impl IntoIterator<Item = (Vec<Value>, f64)>) -> Self {
        let mut r = AnnotatedRelation::new(schema);
        for (t, a) in rows {
            r.insert(t, a);
        }
        r
    }

    /// Adds `a` to the annotation of `tuple`.
    pub fn insert(&mut self, tuple: Vec<Value>, a: f64) {
        assert_eq!(tuple.len(), self.schema.len(), "tuple arity");
        *self.rows.entry(tuple).or_insert(0.0) += a;
    }

    pub fn schema(&self) -> VarSet {
        self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, tuple: &[Value]) -> Option<f64> {
        self.rows.get(tuple).copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[Value], f64)> {
        self.rows.iter().map(|(t, &a)| (t.as_slice(), a))
    }

    /// Sum of all annotations.
    pub fn total(&self) -> f64 {
        self.rows.values().sum()
    }

    /// Positions in `self`'s tuples of the attributes `vars ⊆ schema`.
    fn positions(&self, vars: VarSet) -> Vec<usize> {
        let all: Vec<_> = self.schema.iter().collect();
        vars.iter().map(|v| all.iter().position(|&x| x == v).expect("attribute in schema")).collect()
    }

    fn key(t: &[Value], pos: &[usize]) -> Vec<Value> {
        pos.iter().map(|&p| t[p]).collect()
    }

    /// `self ⋉ other`: tuples that agree with some tuple of `other` on the
    /// shared attributes; annotations unchanged.
    pub fn semijoin(&self, other: &AnnotatedRelation) -> AnnotatedRelation {
        let common = self.schema.inter(other.schema);
        let mine = self.positions(common);
        let theirs = other.positions(common);
        let keys: BTreeSet<Vec<Value>> = other.rows.keys().map(|t| Self::key(t, &theirs)).collect();
        AnnotatedRelation {
            schema: self.schema,
            rows: self
                .rows
                .iter()
                .filter(|(t, _)| keys.contains(&Self::key(t, &mine)))
                .map(|(t, &a)| (t.clone(), a))
                .collect(),
        }
    }

    /// `self ⋈ other` with multiplied annotations.
    pub fn join(&self, other: &AnnotatedRelation) -> AnnotatedRelation {
        let common = self.schema.inter(other.schema);
        let schema = self.schema.union(other.schema);
        let mine = self.positions(common);
        let theirs = other.positions(common);
        let mut groups: BTreeMap<Vec<Value>, Vec<(&Vec<Value>, f64)>> = BTreeMap::new();
        for (t, &a) in &other.rows {
            groups.entry(Self::key(t, &theirs)).or_default().push((t, a));
        }
        let sources: Vec<(bool, usize)> = schema
            .iter()
            .map(|v| match self.schema.contains(v) {
                true => (true, self.positions(VarSet::single(v))[0]),
                false => (false, other.positions(VarSet::single(v))[0]),
            })
            .collect();
        let mut out = AnnotatedRelation::new(schema);
        for (t, &a) in &self.rows {
            let Some(matches) = groups.get(&Self::key(t, &mine)) else { continue };
            for &(u, b) in matches {
                let row = sources.iter().map(|&(left, p)| if left { t[p] } else { u[p] }).collect();
                out.insert(row, a * b);
            }
        }
        out
    }

    /// `Σ_vars self`: marginalizes `vars` out, summing annotations.
    pub fn sum_out(&self, vars: VarSet) -> AnnotatedRelation {
        let keep = self.schema.minus(vars);
        let pos = self.positions(keep);
        let mut out = AnnotatedRelation::new(keep);
        for (t, &a) in &self.rows {
            out.insert(Self::key(t, &pos), a);
        }
        out
    }
}

/// `Σ_{G(𝒯)} ⋈_t R_t` over a GHD whose node relations have schema `G(t)`:
/// semijoin reductions bottom-up and top-down, then a bottom-up join that
/// sums out each attribute at its top node, ending at a virtual root with
/// the empty bag.
///
/// ```
/// use joinest::ghd::{simple_aggro_yannakakis, AnnotatedRelation, Ghd};
/// use joinest::VarSet;
///
/// // A single node has no grouping attributes.
/// let ghd = Ghd::new(vec![VarSet::single(0)], &[]).unwrap();
/// let r = AnnotatedRelation::scalar(5.0);
/// assert_eq!(simple_aggro_yannakakis(&ghd, vec![r]).unwrap(), 5.0);
/// ```
pub fn simple_aggro_yannakakis(ghd: &Ghd, mut rels: Vec<AnnotatedRelation>) -> Result<f64> {
    if rels.len() != ghd.len() {
        return Err(Error::InvalidGhd(format!("{} relations for {} nodes", rels.len(), ghd.len())));
    }
    for (t, r) in rels.iter().enumerate() {
        if r.schema() != ghd.grouping(t) {
            return Err(Error::InvalidGhd(format!("relation {t} does not range over G(t)")));
        }
    }
    let up = ghd.bottom_up();
    for &t in &up {
        if let Some(p) = ghd.parent(t) {
            rels[p] = rels[p].semijoin(&rels[t]);
        }
    }
    for &t in up.iter().rev() {
        if let Some(p) = ghd.parent(t) {
            rels[t] = rels[t].semijoin(&rels[p]);
        }
    }
    let mut virtual_root = AnnotatedRelation::scalar(1.0);
    for &t in &up {
        let beta = ghd.grouping(t).iter().filter(|&v| ghd.top(v) == Some(t)).collect::<VarSet>();
        let reduced = rels[t].sum_out(beta);
        match ghd.parent(t) {
            Some(p) => rels[p] = rels[p].join(&reduced),
            None => virtual_root = virtual_root.join(&reduced),
        }
    }
    Ok(virtual_root.total())
}
