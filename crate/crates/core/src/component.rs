//! Component-at-a-time estimation and uniform sampling for graph queries
//! over one binary relation (SSTE and SUST).
//!
//! A half-integral optimal cover splits the query into vertex-disjoint odd
//! cycles (weight 1/2) and stars (weight 1). Each component is sampled in
//! two rounds: a star draws its center and then its spokes (SSTE) or all
//! spokes at once (SUST); an odd cycle `u_1 v_1 … u_n v_n w` draws its `n`
//! edges `{u_i, v_i}` and then the closing vertex `w`.
//!
//! On every cycle the value of `u_1` must have the smallest degree among the
//! cycle's values (ties to the smallest id). The estimators therefore count,
//! and SUST samples uniformly from, the answers that satisfy this
//! constraint on every cycle. With a symmetric relation every answer is a
//! rotation of such a canonical one, and [`Target::AllAnswers`] undoes the
//! constraint by reweighting with the rotation multiplicity.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::query::{half_integral_cover, AgmValue, Binding, Component, ComponentPlan, Query, Var};
use crate::store::{Relation, Value};

/// Which answers the estimates count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Answers whose cycles all carry their minimum-degree value at `u_1`.
    Canonical,
    /// All answers. Needs a symmetric relation and no zero-weight edge
    /// touching a cycle, so that the answer set is closed under rotating
    /// any cycle.
    AllAnswers,
}

/// Sampler over a graph query whose edges all bind the same relation.
#[derive(Clone, Debug)]
pub struct ComponentSampler {
    query: Query,
    plan: ComponentPlan,
    target: Target,
    relation: Arc<Relation>,
    /// `|R|`, rows with multiplicity.
    size: u64,
    sqrt_size: f64,
}

type Key = (u64, Value);

impl ComponentSampler {
    pub fn new(query: &Query, target: Target) -> Result<Self> {
        let plan = half_integral_cover(query)?;
        let relation = query.atom(0).relation().clone();
        if let Some(a) = query.atoms().iter().find(|a| a.relation().name() != relation.name()) {
            return Err(Error::Unsupported(format!(
                "component sampling needs one relation; found `{}` and `{}`",
                relation.name(),
                a.relation().name()
            )));
        }
        if query.atoms().iter().any(|a| a.is_projected()) {
            return Err(Error::Unsupported("component sampling needs unprojected edges".into()));
        }
        if target == Target::AllAnswers {
            if !relation.is_symmetric() {
                return Err(Error::Unsupported("all-answer target needs a symmetric relation".into()));
            }
            for c in &plan.components {
                if let Component::OddCycle { .. } = c {
                    let vs = c.vars();
                    if plan.unused_edges.iter().any(|&e| query.atom(e).vars().meets(vs)) {
                        return Err(Error::Unsupported(
                            "all-answer target needs cycles untouched by zero-weight edges".into(),
                        ));
                    }
                }
            }
        }
        let size = relation.len() as u64;
        Ok(ComponentSampler {
            query: query.clone(),
            plan,
            target,
            relation,
            size,
            sqrt_size: (size as f64).sqrt(),
        })
    }

    pub fn plan(&self) -> &ComponentPlan {
        &self.plan
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// `AGM(ℋ)` of the half-integral cover: `|R|^{Σ x_F}`.
    pub fn agm(&self) -> AgmValue {
        self.plan.cover.agm()
    }

    /// `2^d · AGM · out`, with `d` the number of components. For
    /// [`Target::AllAnswers`] each canonical hit carries a weight of at most
    /// `Π L` (the cycle lengths), and the bound grows by that factor.
    pub fn variance_bound(&self, out: f64) -> f64 {
        let mut w = 1.0;
        if self.target == Target::AllAnswers {
            for c in &self.plan.components {
                if let Component::OddCycle { vertices, .. } = c {
                    w *= vertices.len() as f64;
                }
            }
        }
        2f64.powi(self.plan.len() as i32) * w * self.agm().value() * out
    }

    /// Probability with which [`ComponentSampler::sust_sample`] returns each
    /// answer of the target, for a relation without duplicate rows.
    pub fn success_probability(&self) -> f64 {
        let mut ln = -self.agm().ln();
        if self.target == Target::AllAnswers {
            for c in &self.plan.components {
                if let Component::OddCycle { vertices, .. } = c {
                    ln -= (vertices.len() as f64).ln();
                }
            }
        }
        ln.exp()
    }

    /// `u_1`-column degree in the cycle's closing edge, which is `|R ⋉ a|`
    /// for a symmetric relation.
    fn key(&self, edges: &[usize], vertices: &[Var], x: Value) -> Key {
        let f0 = self.query.atom(*edges.last().unwrap());
        let mut b = Binding::new(self.query.n_vars());
        b.set(vertices[0], x);
        (f0.count(&b), x)
    }

    /// Whether the cycle values in `s` satisfy the minimum-degree constraint.
    pub fn is_canonical(&self, s: &Binding) -> bool {
        self.plan.components.iter().all(|c| match c {
            Component::OddCycle { vertices, edges } => {
                let k0 = self.key(edges, vertices, s.at(vertices[0]));
                vertices.iter().all(|&v| k0 <= self.key(edges, vertices, s.at(v)))
            }
            Component::Star { .. } => true,
        })
    }

    /// Number of rotations of each cycle that are canonical, multiplied over
    /// cycles; the weight of `s` in the all-answers target is
    /// `Π (2n + 1) / c`.
    fn rotation_weight(&self, s: &Binding) -> f64 {
        let mut w = 1.0;
        for c in &self.plan.components {
            if let Component::OddCycle { vertices, edges } = c {
                let keys: Vec<Key> = vertices.iter().map(|&v| self.key(edges, vertices, s.at(v))).collect();
                let min = *keys.iter().min().unwrap();
                let count = keys.iter().filter(|&&k| k == min).count();
                w *= vertices.len() as f64 / count as f64;
            }
        }
        w
    }

    /// One SSTE run: an unbiased estimate of the target count.
    pub fn sste_estimate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.size == 0 {
            return 0.0;
        }
        let mut s = Binding::new(self.query.n_vars());
        self.sste(0, &mut s, rng)
    }

    fn sste<R: Rng + ?Sized>(&self, i: usize, s: &mut Binding, rng: &mut R) -> f64 {
        let Some(comp) = self.plan.components.get(i) else {
            return self.finish(s);
        };
        match comp {
            Component::Star { center, leaves, edges } => {
                // Center from a uniform row of the first edge.
                let f1 = self.query.atom(edges[0]);
                let mut next = s.clone();
                if !f1.sample_into(s, f1.vars(), rng, &mut next) {
                    return 0.0;
                }
                let a = next.at(*center);
                s.set(*center, a);
                let p_center = f1.count(s) as f64 / self.query.atom(edges[0]).count(&self.unbound()) as f64;
                // One uniform spoke value per edge.
                let mut inv = 1.0 / p_center;
                for (&leaf, &e) in leaves.iter().zip(edges) {
                    let atom = self.query.atom(e);
                    let n = atom.distinct(s, crate::query::VarSet::single(leaf));
                    let Some(b) = atom.sample_value(s, leaf, rng) else {
                        self.clear(s, comp);
                        return 0.0;
                    };
                    s.set(leaf, b);
                    inv *= n as f64;
                }
                let z = inv * self.sste(i + 1, s, rng);
                self.clear(s, comp);
                z
            }
            Component::OddCycle { vertices, edges } => {
                let Some(inv_edges) = self.cycle_edges(vertices, edges, s, rng) else {
                    self.clear(s, comp);
                    return 0.0;
                };
                let w = *vertices.last().unwrap();
                let f0 = self.query.atom(*edges.last().unwrap());
                let k1 = self.key(edges, vertices, s.at(vertices[0]));
                let omega = f0.values(s, w);
                if omega.is_empty() {
                    self.clear(s, comp);
                    return 0.0;
                }
                let k = (omega.len() as f64 / self.sqrt_size).ceil().max(1.0) as usize;
                let closing = self.query.atom(edges[edges.len() - 2]);
                let mut sum = 0.0;
                for _ in 0..k {
                    let x = omega[rng.random_range(0..omega.len())];
                    if self.key(edges, vertices, x) < k1 {
                        continue;
                    }
                    s.set(w, x);
                    if closing.contains(s) {
                        sum += omega.len() as f64 * self.sste(i + 1, s, rng);
                    }
                    s.unset(w);
                }
                self.clear(s, comp);
                inv_edges * sum / k as f64
            }
        }
    }

    /// SUST thins high-degree closing vertices by `√|R| / |R ⋉ w|`, which
    /// stays a probability only when degrees agree across columns.
    fn check_sust(&self) -> Result<()> {
        let cycles = self.plan.components.iter().any(|c| matches!(c, Component::OddCycle { .. }));
        if cycles && !self.relation.is_symmetric() {
            return Err(Error::Unsupported("SUST on odd cycles needs a symmetric relation".into()));
        }
        Ok(())
    }

    /// One SUST trial as an estimator: `1/P` on success, else 0.
    pub fn sust_estimate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.check_sust()?;
        let mut s = Binding::new(self.query.n_vars());
        Ok(match self.sust(&mut s, rng) {
            Some(inv) if self.target == Target::AllAnswers => inv * self.rotation_weight(&s),
            Some(inv) => inv,
            None => 0.0,
        })
    }

    /// One SUST attempt at a uniform answer of the target.
    pub fn sust_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<Binding>> {
        self.check_sust()?;
        let mut s = Binding::new(self.query.n_vars());
        Ok(self.sust_attempt(&mut s, rng))
    }

    fn sust_attempt<R: Rng + ?Sized>(&self, s: &mut Binding, rng: &mut R) -> Option<Binding> {
        self.sust(s, rng)?;
        let s = s.clone();
        if self.target == Target::Canonical {
            return Some(s);
        }
        // Thin by the number of canonical rotations, then rotate uniformly.
        let mut out = s.clone();
        for c in &self.plan.components {
            if let Component::OddCycle { vertices, edges } = c {
                let keys: Vec<Key> = vertices.iter().map(|&v| self.key(edges, vertices, s.at(v))).collect();
                let min = *keys.iter().min().unwrap();
                let count = keys.iter().filter(|&&k| k == min).count();
                if count > 1 && rng.random_range(0..count) != 0 {
                    return None;
                }
                let len = vertices.len();
                let j = rng.random_range(0..len);
                for p in 0..len {
                    out.set(vertices[p], s.at(vertices[(p + j) % len]));
                }
            }
        }
        Some(out)
    }

    /// Runs every component once; returns `1/P` of the path on success.
    fn sust<R: Rng + ?Sized>(&self, s: &mut Binding, rng: &mut R) -> Option<f64> {
        if self.size == 0 {
            return None;
        }
        let mut inv = 1.0;
        for comp in &self.plan.components {
            match comp {
                Component::Star { center, edges, .. } => {
                    // n rows drawn jointly; they must share the center.
                    let mut shared = None;
                    for &e in edges {
                        let atom = self.query.atom(e);
                        let mut row = s.clone();
                        let scratch = self.unbound();
                        if !atom.sample_into(&scratch, atom.vars(), rng, &mut row) {
                            return None;
                        }
                        let a = row.at(*center);
                        if shared.get_or_insert(a) != &a {
                            return None;
                        }
                        *s = row;
                        inv *= self.size as f64 / atom.count(s) as f64;
                    }
                }
                Component::OddCycle { vertices, edges } => {
                    inv *= self.cycle_edges(vertices, edges, s, rng)?;
                    let w = *vertices.last().unwrap();
                    let f0 = self.query.atom(*edges.last().unwrap());
                    let k1 = self.key(edges, vertices, s.at(vertices[0]));
                    let x = if (k1.0 as f64) < self.sqrt_size {
                        // Low degree: one of ⌊√|R|⌋ slots, most of them empty.
                        let omega = f0.values(s, w);
                        let slot = (rng.random::<f64>() * self.sqrt_size) as usize;
                        *omega.get(slot)?
                    } else {
                        // High degree: a row-weighted w, thinned to 1/√|R|.
                        let mut row = s.clone();
                        let scratch = self.unbound();
                        if !f0.sample_into(&scratch, crate::query::VarSet::single(w), rng, &mut row) {
                            return None;
                        }
                        let x = row.at(w);
                        let kx = self.key(edges, vertices, x);
                        if kx < k1 {
                            return None;
                        }
                        let mut bw = self.unbound();
                        bw.set(w, x);
                        let keep = self.sqrt_size / f0.count(&bw) as f64;
                        debug_assert!(keep <= 1.0 + 1e-9, "keep probability {keep} exceeds 1");
                        if rng.random::<f64>() >= keep {
                            return None;
                        }
                        x
                    };
                    if self.key(edges, vertices, x) < k1 {
                        return None;
                    }
                    s.set(w, x);
                    let closing = self.query.atom(edges[edges.len() - 2]);
                    if !closing.contains(s) || !f0.contains(s) {
                        return None;
                    }
                    inv *= self.sqrt_size;
                }
            }
        }
        (self.finish(s) > 0.0).then_some(inv)
    }

    /// Draws the cycle edges `{u_i, v_i}` as uniform rows, checking the
    /// connecting edges and the degree constraint so far. Returns `1/P`.
    fn cycle_edges<R: Rng + ?Sized>(&self, vertices: &[Var], edges: &[usize], s: &mut Binding, rng: &mut R) -> Option<f64> {
        let n = (vertices.len() - 1) / 2;
        let mut inv = 1.0;
        for i in 0..n {
            let atom = self.query.atom(edges[2 * i]);
            let mut row = s.clone();
            if !atom.sample_into(s, atom.vars(), rng, &mut row) {
                return None;
            }
            *s = row;
            inv *= self.size as f64 / atom.count(s) as f64;
            if i > 0 && !self.query.atom(edges[2 * i - 1]).contains(s) {
                return None;
            }
        }
        let k1 = self.key(edges, vertices, s.at(vertices[0]));
        vertices[1..2 * n]
            .iter()
            .all(|&v| self.key(edges, vertices, s.at(v)) >= k1)
            .then_some(inv)
    }

    /// Leaf: the zero-weight edges must hold, then the target's weight.
    fn finish(&self, s: &Binding) -> f64 {
        if !self.plan.unused_edges.iter().all(|&e| self.query.atom(e).contains(s)) {
            return 0.0;
        }
        match self.target {
            Target::Canonical => 1.0,
            Target::AllAnswers => self.rotation_weight(s),
        }
    }

    fn unbound(&self) -> Binding {
        Binding::new(self.query.n_vars())
    }

    fn clear(&self, s: &mut Binding, comp: &Component) {
        s.unset_all(comp.vars());
    }

    pub fn relation(&self) -> &Arc<Relation> {
        &self.relation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Database;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k4() -> Database {
        let mut rows = Vec::new();
        for a in 1..=4u32 {
            for b in 1..=4u32 {
                if a != b {
                    rows.push([a, b]);
                }
            }
        }
        let refs: Vec<&[u32]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut db = Database::new();
        db.add("E", &["s", "t"], &refs).unwrap();
        db.add("F", &["s", "t"], &[&[1, 2]]).unwrap();
        db
    }

    #[test]
    fn rejects_mixed_relations() {
        let db = k4();
        let q = Query::parse("E(A,B), F(B,C)", &db).unwrap();
        assert!(ComponentSampler::new(&q, Target::Canonical).is_err());
    }

    #[test]
    fn triangle_on_k4_canonical_count() {
        // All degrees tie at 3, so canonical means u_1 holds the smallest id:
        // 24 triangles, 8 of which start at their minimum.
        let db = k4();
        let q = Query::parse("E(A,B), E(B,C), E(C,A)", &db).unwrap();
        let s = ComponentSampler::new(&q, Target::Canonical).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 40_000;
        let mean: f64 = (0..n).map(|_| s.sste_estimate(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 8.0).abs() < 0.5, "{mean}");
        let all = ComponentSampler::new(&q, Target::AllAnswers).unwrap();
        let mean: f64 = (0..n).map(|_| all.sust_estimate(&mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 24.0).abs() < 1.5, "{mean}");
    }

    #[test]
    fn empty_relation_gives_zero() {
        let mut db = Database::new();
        db.add("E", &["s", "t"], &[]).unwrap();
        let q = Query::parse("E(A,B), E(B,C)", &db).unwrap();
        let s = ComponentSampler::new(&q, Target::Canonical).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(s.sste_estimate(&mut rng), 0.0);
        assert!(s.sust_sample(&mut rng).unwrap().is_none());
    }
}
