//! Join queries as hypergraphs over stored relations, plus the fractional
//! edge cover LP and the AGM bound built on it.

mod atom;
mod cover;
mod half;
mod lp;
mod spec;
mod varset;

pub use atom::Atom;
pub use cover::{
    agm, fractional_edge_cover, fractional_edge_cover_for, residual_agm, AgmValue, FractionalEdgeCover,
};
pub use half::{half_integral_cover, Component, ComponentPlan};
pub use lp::{lex_min_cover, log_sign};
pub use spec::{EdgeSpec, GhdNodeSpec, GhdSpec, QuerySpec};
pub use varset::{Binding, Var, VarSet, MAX_VARS};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::store::{Database, Relation};

/// A natural join `⋈_F R_F` written as a hypergraph: attributes are
/// vertices and every atom is a hyperedge bound to a relation.
#[derive(Clone, Debug)]
pub struct Query {
    attrs: Vec<String>,
    atoms: Vec<Atom>,
}

impl Query {
    /// Builds and validates a query. Every attribute must occur in an atom.
    pub fn new(attrs: Vec<String>, atoms: Vec<Atom>) -> Result<Self> {
        let q = Query::unchecked(attrs, atoms)?;
        if let Some(v) = VarSet::first(q.n_vars()).minus(q.scope()).min() {
            return Err(Error::Uncovered(q.attrs[v].clone()));
        }
        Ok(q)
    }

    /// Builds a query whose atoms may leave some attributes uncovered; used
    /// for sub-queries that keep the parent's attribute numbering.
    pub(crate) fn unchecked(attrs: Vec<String>, atoms: Vec<Atom>) -> Result<Self> {
        if attrs.len() > MAX_VARS {
            return Err(Error::Query(format!("more than {MAX_VARS} attributes")));
        }
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].contains(a) {
                return Err(Error::Query(format!("attribute `{a}` declared twice")));
            }
        }
        for atom in &atoms {
            if atom.vars().iter().any(|v| v >= attrs.len()) {
                return Err(Error::Query(format!(
                    "edge over `{}` uses an undeclared attribute",
                    atom.relation().name()
                )));
            }
        }
        Ok(Query { attrs, atoms })
    }

    /// Parses a rule body such as `R(A,B), S(B,C), T(A,C)`. Attributes are
    /// numbered in order of first appearance.
    ///
    /// ```
    /// use joinest::{Database, Query};
    ///
    /// let mut db = Database::new();
    /// db.add("R", &["x", "y"], &[&[1, 2], &[2, 3]]).unwrap();
    /// let q = Query::parse("R(A,B), R(B,C)", &db).unwrap();
    /// assert_eq!(q.attrs(), ["A", "B", "C"]);
    /// assert_eq!(q.atoms().len(), 2);
    /// ```
    pub fn parse(text: &str, db: &Database) -> Result<Self> {
        let mut attrs: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| Error::Query(format!("expected `name(...)` at `{rest}`")))?;
            let close = rest
                .find(')')
                .filter(|&c| c > open)
                .ok_or_else(|| Error::Query(format!("unclosed atom at `{rest}`")))?;
            let name = rest[..open].trim().trim_start_matches(',').trim();
            let vars: Vec<String> = rest[open + 1..close]
                .split(',')
                .map(|v| v.trim().to_owned())
                .filter(|v| !v.is_empty())
                .collect();
            for v in &vars {
                if !attrs.contains(v) {
                    attrs.push(v.clone());
                }
            }
            edges.push(EdgeSpec {
                relation: name.to_owned(),
                vars,
            });
            rest = rest[close + 1..].trim().trim_start_matches(',').trim();
        }
        Query::from_spec(
            &QuerySpec {
                attributes: attrs,
                edges,
                projection: None,
                ghd: None,
            },
            db,
        )
    }

    /// Resolves a query specification against a database.
    pub fn from_spec(spec: &QuerySpec, db: &Database) -> Result<Self> {
        let var_of = |name: &str| {
            spec.attributes
                .iter()
                .position(|a| a == name)
                .ok_or_else(|| Error::Query(format!("edge uses undeclared attribute `{name}`")))
        };
        let mut atoms = Vec::with_capacity(spec.edges.len());
        for (i, e) in spec.edges.iter().enumerate() {
            let rel = db
                .get(&e.relation)
                .ok_or_else(|| Error::UnboundRelation(e.relation.clone()))?;
            if e.vars.is_empty() {
                return Err(Error::Query(format!("edge {i} ({}) has no attributes", e.relation)));
            }
            if rel.arity() != e.vars.len() {
                return Err(Error::EdgeArity {
                    edge: i,
                    relation: e.relation.clone(),
                    expected: rel.arity(),
                    found: e.vars.len(),
                });
            }
            let vars = e.vars.iter().map(|v| var_of(v)).collect::<Result<Vec<_>>>()?;
            if vars.iter().collect::<std::collections::HashSet<_>>().len() != vars.len() {
                return Err(Error::Query(format!(
                    "edge {i} ({}) repeats an attribute",
                    e.relation
                )));
            }
            atoms.push(Atom::new(rel.clone(), vars));
        }
        Query::new(spec.attributes.clone(), atoms)
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn n_vars(&self) -> usize {
        self.attrs.len()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.attrs.iter().position(|a| a == name)
    }

    /// Looks up several attributes by name.
    pub fn vars(&self, names: &[&str]) -> Result<VarSet> {
        names
            .iter()
            .map(|n| self.var(n).ok_or_else(|| Error::Query(format!("unknown attribute `{n}`"))))
            .collect()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, e: usize) -> &Atom {
        &self.atoms[e]
    }

    /// Attributes covered by at least one atom.
    pub fn scope(&self) -> VarSet {
        self.atoms.iter().fold(VarSet::EMPTY, |s, a| s.union(a.vars()))
    }

    /// `ℰ_I`: atoms meeting `vars`.
    pub fn edges_meeting(&self, vars: VarSet) -> impl Iterator<Item = usize> + '_ {
        (0..self.atoms.len()).filter(move |&e| self.atoms[e].vars().meets(vars))
    }

    /// `|R_F|` for every atom (distinct tuples for projected atoms).
    pub fn sizes(&self) -> Vec<u64> {
        let empty = Binding::new(self.n_vars());
        self.atoms.iter().map(|a| a.count(&empty)).collect()
    }

    /// `IN = max_F |R_F|`.
    pub fn input_size(&self) -> u64 {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    /// Same attributes, different atoms.
    pub(crate) fn with_atoms(&self, atoms: Vec<Atom>) -> Query {
        Query {
            attrs: self.attrs.clone(),
            atoms,
        }
    }

    /// `ℋ_χ`: projections of the atoms meeting `bag` onto `bag`.
    pub fn induced(&self, bag: VarSet) -> Query {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.vars().meets(bag))
            .map(|a| a.project_onto(bag))
            .collect();
        self.with_atoms(atoms)
    }

    /// Relations referenced by the query, deduplicated by name.
    pub fn relations(&self) -> Vec<Arc<Relation>> {
        let mut out: Vec<Arc<Relation>> = Vec::new();
        for a in &self.atoms {
            if !out.iter().any(|r| r.name() == a.relation().name()) {
                out.push(a.relation().clone());
            }
        }
        out
    }

    /// Names of `vars` in attribute order.
    pub fn names(&self, vars: VarSet) -> Vec<&str> {
        vars.iter().map(|v| self.attrs[v].as_str()).collect()
    }
}
