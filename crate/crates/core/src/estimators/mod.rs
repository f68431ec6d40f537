//! Sampling-based join size estimation and uniform join sampling.
//!
//! Every estimator here is one instantiation of a single recursive scheme:
//! pick the next attributes `I`, draw samples `s_I` from a sample space with
//! known probabilities `P(s_I)`, reject those that are not join answers on
//! the edges meeting `I`, and recurse on the residual query. Averaging
//! `1 / P` along the surviving paths gives an unbiased estimate of the
//! number of answers. The strategies differ only in how `s_I` is drawn:
//!
//! * [`StrategyKind::WanderJoin`] walks the edges in a fixed order and draws
//!   a row of each edge uniformly;
//! * [`StrategyKind::AlleyPlus`] intersects the candidate values of one
//!   attribute and recurses into a `b` fraction of them without replacement;
//! * [`StrategyKind::GjSample`] draws one value with probability
//!   proportional to the residual AGM bound it leaves;
//! * [`StrategyKind::Drs`] reaches the same distribution up to a constant
//!   without a probability table: sample an edge, then a row, and keep the
//!   value only when that edge maximizes its relative degree, thinned by the
//!   AGM ratio.

pub(crate) mod driver;
mod order;

pub use driver::{estimate_with_guarantee, trial_rng, DriverConfig, DriverMode, EstimateReport};
pub use order::{elimination_order, walk_order};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::{fractional_edge_cover, AgmValue, Binding, FractionalEdgeCover, Query, Var, VarSet};
use crate::store::Value;

/// The four sample-space instantiations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    WanderJoin,
    AlleyPlus,
    GjSample,
    Drs,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::WanderJoin => "wander-join",
            StrategyKind::AlleyPlus => "alley+",
            StrategyKind::GjSample => "gj-sample",
            StrategyKind::Drs => "drs",
        }
    }
}

/// How an [`Estimator`] draws its samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Branch fraction `b ∈ (0, 1]` of Alley+.
    pub branch: f64,
    /// Edge order of WanderJoin; defaults to [`walk_order`].
    pub edge_order: Option<Vec<usize>>,
    /// Attribute order of the variable-at-a-time strategies; defaults to
    /// [`elimination_order`].
    pub attr_order: Option<Vec<Var>>,
    /// DRS: on an `m`-way tie for the maximum relative degree, keep without
    /// dividing by `m`.
    pub tie_boost: bool,
    /// DRS: accept whichever edge was drawn, not only a maximizing one.
    pub any_edge_boost: bool,
    /// Do not sample attributes that occur in a single edge; count them at
    /// the leaf instead.
    pub skip_nonjoin: bool,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyConfig {
            kind,
            branch: 1.0,
            edge_order: None,
            attr_order: None,
            tie_boost: false,
            any_edge_boost: false,
            skip_nonjoin: false,
        }
    }

    pub fn wander_join() -> Self {
        StrategyConfig::new(StrategyKind::WanderJoin)
    }

    pub fn alley_plus(branch: f64) -> Self {
        StrategyConfig {
            branch,
            ..StrategyConfig::new(StrategyKind::AlleyPlus)
        }
    }

    pub fn gj_sample() -> Self {
        StrategyConfig::new(StrategyKind::GjSample)
    }

    pub fn drs() -> Self {
        StrategyConfig::new(StrategyKind::Drs)
    }

    pub fn with_skip(mut self, on: bool) -> Self {
        self.skip_nonjoin = on;
        self
    }

    pub fn with_tie_boost(mut self, on: bool) -> Self {
        self.tie_boost = on;
        self
    }

    pub fn with_any_edge_boost(mut self, on: bool) -> Self {
        self.any_edge_boost = on;
        self
    }

    pub fn with_attr_order(mut self, order: Vec<Var>) -> Self {
        self.attr_order = Some(order);
        self
    }

    pub fn with_edge_order(mut self, order: Vec<usize>) -> Self {
        self.edge_order = Some(order);
        self
    }

    /// `t = 2(1 − b)/b` of the Alley+ variance bound.
    pub fn t(&self) -> f64 {
        2.0 * (1.0 - self.branch) / self.branch
    }

    /// True when every answer is reached with the same probability, so the
    /// estimator doubles as a uniform sampler.
    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, StrategyKind::GjSample | StrategyKind::Drs)
            && !self.tie_boost
            && !self.any_edge_boost
            && !self.skip_nonjoin
    }
}

/// One retained sample of a step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSample {
    /// `s_I`, in ascending attribute order.
    pub values: Vec<(Var, Value)>,
    /// `P(s_I)`.
    pub probability: f64,
    /// Whether `s_I` joins with every edge meeting `I`.
    pub member: bool,
}

/// Result of one sampling step from a partial answer `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// The attributes `I` bound by this step.
    pub vars: VarSet,
    /// Retained samples; empty on rejection.
    pub samples: Vec<StepSample>,
    /// Number of samples drawn, `k`.
    pub k: usize,
    /// `|Ω_I|` when the strategy materializes it.
    pub space: Option<u64>,
    pub without_replacement: bool,
    /// Query-model operations spent.
    pub ops: u64,
}

#[derive(Clone, Debug)]
enum Step {
    Var { var: Var, edges: Vec<usize> },
    Edge { edge: usize, vars: VarSet, checks: Vec<usize> },
}

impl Step {
    fn vars(&self) -> VarSet {
        match self {
            Step::Var { var, .. } => VarSet::single(*var),
            Step::Edge { vars, .. } => *vars,
        }
    }
}

/// A sampling plan for one query and strategy.
///
/// ```
/// use joinest::estimators::{Estimator, StrategyConfig};
/// use joinest::{Database, Query};
/// use rand::SeedableRng;
///
/// let mut db = Database::new();
/// db.add("R", &["x", "y"], &[&[1, 2], &[2, 3], &[1, 3]]).unwrap();
/// let q = Query::parse("R(A,B), R(B,C), R(A,C)", &db).unwrap();
/// let exact = Estimator::new(&q, StrategyConfig::alley_plus(1.0)).unwrap();
/// let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
/// assert_eq!(exact.estimate(&mut rng), 1.0);
/// ```
#[derive(Clone, Debug)]
pub struct Estimator {
    query: Query,
    config: StrategyConfig,
    cover: FractionalEdgeCover,
    weights: Vec<f64>,
    bound: VarSet,
    target: VarSet,
    skipped: VarSet,
    steps: Vec<Step>,
    /// Edges with skipped attributes and those attributes.
    leaf: Vec<(usize, VarSet)>,
    /// `next_agm[d][e]`: whether edge `e` still meets the unsampled
    /// attributes after step `d`.
    next_agm: Vec<Vec<bool>>,
}

impl Estimator {
    /// Estimator for the full query.
    pub fn new(query: &Query, config: StrategyConfig) -> Result<Self> {
        Estimator::residual(query, VarSet::EMPTY, config)
    }

    /// Estimator for the residual query `ℋ_s` where `s` binds `bound`: the
    /// number of answers over the remaining attributes that extend `s`.
    pub fn residual(query: &Query, bound: VarSet, config: StrategyConfig) -> Result<Self> {
        if !(config.branch > 0.0 && config.branch <= 1.0) {
            return Err(Error::Query(format!("branch fraction {} outside (0, 1]", config.branch)));
        }
        if config.kind != StrategyKind::Drs && (config.tie_boost || config.any_edge_boost) {
            return Err(Error::Unsupported("probability boosting applies to DRS only".into()));
        }
        let scope = query.scope();
        let target = scope.minus(bound);
        let skipped = if config.skip_nonjoin {
            target
                .iter()
                .filter(|&v| query.edges_meeting(VarSet::single(v)).count() == 1)
                .collect()
        } else {
            VarSet::EMPTY
        };
        let sampled = target.minus(skipped);
        let steps = match config.kind {
            StrategyKind::WanderJoin => {
                let order = match &config.edge_order {
                    Some(o) => {
                        let mut sorted = o.clone();
                        sorted.sort_unstable();
                        if sorted != (0..query.atoms().len()).collect::<Vec<_>>() {
                            return Err(Error::Query("edge order is not a permutation of the edges".into()));
                        }
                        o.clone()
                    }
                    None => walk_order(query),
                };
                let mut done = VarSet::EMPTY;
                let mut steps = Vec::new();
                for e in order {
                    let vars = query.atom(e).vars().inter(sampled).minus(done);
                    if vars.is_empty() {
                        continue;
                    }
                    done = done.union(vars);
                    let checks = query.edges_meeting(vars).filter(|&f| f != e).collect();
                    steps.push(Step::Edge { edge: e, vars, checks });
                }
                steps
            }
            _ => {
                let order = match &config.attr_order {
                    Some(o) => {
                        let o: Vec<Var> = o.iter().copied().filter(|&v| sampled.contains(v)).collect();
                        if o.iter().copied().collect::<VarSet>() != sampled || o.len() != sampled.len() {
                            return Err(Error::Query("attribute order must list every sampled attribute once".into()));
                        }
                        o
                    }
                    None => elimination_order(query, sampled),
                };
                order
                    .into_iter()
                    .map(|var| Step::Var {
                        var,
                        edges: query.edges_meeting(VarSet::single(var)).collect(),
                    })
                    .collect()
            }
        };
        let mut remaining = target;
        let mut next_agm = Vec::with_capacity(steps.len());
        for st in &steps {
            remaining = remaining.minus(st.vars());
            next_agm.push(query.atoms().iter().map(|a| a.vars().meets(remaining)).collect());
        }
        let leaf = (0..query.atoms().len())
            .filter_map(|e| {
                let x = query.atom(e).vars().inter(skipped);
                (!x.is_empty()).then_some((e, x))
            })
            .collect();
        let cover = fractional_edge_cover(query);
        let weights = (0..query.atoms().len()).map(|e| cover.weight(e)).collect();
        Ok(Estimator {
            query: query.clone(),
            config,
            cover,
            weights,
            bound,
            target,
            skipped,
            steps,
            leaf,
            next_agm,
        })
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn cover(&self) -> &FractionalEdgeCover {
        &self.cover
    }

    /// `AGM(ℋ)` for the query's relation sizes.
    pub fn agm(&self) -> AgmValue {
        self.cover.agm()
    }

    /// Attributes the estimator binds, `𝒪`.
    pub fn target(&self) -> VarSet {
        self.target
    }

    /// Attributes excluded from sampling.
    pub fn skipped(&self) -> VarSet {
        self.skipped
    }

    /// Attributes in the order they are sampled (grouped per step for
    /// WanderJoin).
    pub fn order(&self) -> Vec<VarSet> {
        self.steps.iter().map(Step::vars).collect()
    }

    /// `Π_I |ℰ_I|` over the sampling steps.
    pub fn edge_product(&self) -> f64 {
        self.steps
            .iter()
            .map(|st| match st {
                Step::Var { edges, .. } => edges.len() as f64,
                Step::Edge { .. } => 1.0,
            })
            .product()
    }

    /// Probability with which a uniform sampler reaches each answer:
    /// `1/AGM` for GJ-Sample and `Π_I (1/|ℰ_I|) / AGM` for DRS.
    pub fn uniform_probability(&self) -> Result<f64> {
        if !self.config.is_uniform() {
            return Err(Error::Unsupported(format!(
                "{} with these options is not a uniform sampler",
                self.config.kind.name()
            )));
        }
        if !self.bound.is_empty() {
            return Err(Error::Unsupported("uniform sampling starts from the empty binding".into()));
        }
        let agm = self.agm();
        if agm.is_zero() {
            return Ok(0.0);
        }
        let c = match self.config.kind {
            StrategyKind::Drs => self.edge_product(),
            _ => 1.0,
        };
        Ok((-agm.ln() - c.ln()).exp())
    }

    /// Upper bound on `Var[Z]` when the true count is `out`.
    pub fn variance_bound(&self, out: f64) -> f64 {
        let n = (self.steps.len() + usize::from(!self.leaf.is_empty())) as f64;
        match self.config.kind {
            StrategyKind::AlleyPlus => {
                let t = self.config.t();
                let f = if t == 0.0 {
                    0.0
                } else if (t - 1.0).abs() < 1e-12 {
                    n - 1.0
                } else {
                    (t.powf(n) - t) / (t - 1.0)
                };
                f.max(0.0) * out * out
            }
            StrategyKind::GjSample => n * self.agm().value() * out,
            StrategyKind::Drs => n * self.edge_product() * self.agm().value() * out,
            StrategyKind::WanderJoin => {
                let sizes = self.query.sizes();
                let walk: f64 = self
                    .steps
                    .iter()
                    .map(|st| match st {
                        Step::Edge { edge, .. } => sizes[*edge] as f64,
                        Step::Var { .. } => 1.0,
                    })
                    .product();
                let leaf: f64 = self.leaf.iter().map(|&(e, _)| sizes[e] as f64).product();
                walk * leaf * out
            }
        }
    }

    /// One run of the estimator from the empty binding.
    pub fn estimate<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.estimate_from(&Binding::new(self.query.n_vars()), rng).0
    }

    /// One run from `s`, which must bind exactly the attributes this
    /// estimator was built for and be an answer of the query on them.
    /// Returns the estimate and the operations spent.
    pub fn estimate_from<R: Rng + ?Sized>(&self, s: &Binding, rng: &mut R) -> (f64, u64) {
        debug_assert_eq!(s.bound().inter(self.query.scope()), self.bound);
        let mut ops = 0;
        let mut b = s.clone();
        let z = match self.config.kind {
            StrategyKind::AlleyPlus => self.alley(0, &mut b, rng, &mut ops),
            _ => match self.walk(&mut b, rng, &mut ops) {
                Some(p) => self.leaf_count(&b, &mut ops) / p,
                None => 0.0,
            },
        };
        (z, ops)
    }

    /// One attempt at a uniform answer. `None` is a failed trial.
    pub fn uniform_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<Binding>> {
        self.uniform_probability()?;
        let mut b = Binding::new(self.query.n_vars());
        let mut ops = 0;
        Ok(self.walk(&mut b, rng, &mut ops).map(|_| b))
    }

    /// Like [`Estimator::uniform_sample`], also returning the operations spent.
    pub(crate) fn uniform_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> (Option<Binding>, u64) {
        let mut b = Binding::new(self.query.n_vars());
        let mut ops = 0;
        let hit = self.walk(&mut b, rng, &mut ops).is_some();
        (hit.then_some(b), ops)
    }

    /// Performs the step that follows `s` and reports what it drew.
    pub fn step<R: Rng + ?Sized>(&self, s: &Binding, rng: &mut R) -> Option<StepOutcome> {
        let d = self.depth_of(s)?;
        let vars = self.steps[d].vars();
        let mut ops = 0;
        let mut b = s.clone();
        if self.config.kind == StrategyKind::AlleyPlus {
            let Step::Var { var, edges } = &self.steps[d] else { unreachable!() };
            let omega = self.intersection(*var, edges, s, &mut ops);
            let n = omega.len();
            let k = self.branch_size(n);
            let picks = if n == 0 {
                Vec::new()
            } else {
                rand::seq::index::sample(rng, n, k).into_vec()
            };
            let samples = picks
                .into_iter()
                .map(|i| StepSample {
                    values: vec![(*var, omega[i])],
                    probability: 1.0 / n as f64,
                    member: true,
                })
                .collect();
            return Some(StepOutcome {
                vars,
                samples,
                k,
                space: Some(n as u64),
                without_replacement: true,
                ops,
            });
        }
        let space = match &self.steps[d] {
            Step::Var { var, edges } if self.config.kind == StrategyKind::GjSample => {
                let f = self.gj_edge(*var, edges, s, &mut ops);
                Some(self.query.atom(f).distinct(s, VarSet::single(*var)))
            }
            _ => None,
        };
        let drawn = self.sample_step(d, &mut b, rng, &mut ops);
        let samples = match drawn {
            Some(p) => vec![StepSample {
                values: vars.iter().map(|v| (v, b.at(v))).collect(),
                probability: p,
                member: true,
            }],
            None => Vec::new(),
        };
        Some(StepOutcome {
            vars,
            samples,
            k: 1,
            space,
            without_replacement: false,
            ops,
        })
    }

    /// Exact probability `P(s_I)` with which the single-attribute step after
    /// `s` returns each candidate value as a kept sample, for GJ-Sample and
    /// DRS. Candidates are the values of the attribute in any edge meeting it.
    pub fn step_probabilities(&self, s: &Binding) -> Option<(Var, Vec<(Value, f64)>)> {
        let d = self.depth_of(s)?;
        let Step::Var { var, edges } = &self.steps[d] else { return None };
        let mut candidates: Vec<Value> = edges
            .iter()
            .flat_map(|&e| self.query.atom(e).values(s, *var))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut ops = 0;
        let before = self.counts(edges, s, &mut ops);
        let mut b = s.clone();
        let out = match self.config.kind {
            StrategyKind::GjSample => {
                let f = self.gj_edge(*var, edges, s, &mut ops);
                let table = self.gj_table(d, *var, edges, f, &before, s, &mut ops);
                candidates
                    .iter()
                    .map(|&x| {
                        let p = table
                            .iter()
                            .find(|(y, _, _)| *y == x)
                            .filter(|(_, _, member)| *member)
                            .map_or(0.0, |&(_, p, _)| p);
                        (x, p)
                    })
                    .collect()
            }
            StrategyKind::Drs => candidates
                .iter()
                .map(|&x| {
                    b.set(*var, x);
                    let after = self.counts(edges, &b, &mut ops);
                    let m = edges.len() as f64;
                    let p = if after.contains(&0) {
                        0.0
                    } else {
                        (0..edges.len())
                            .map(|i| {
                                let (keep, _) = self.drs_accept(d, edges, i, &before, &after);
                                after[i] as f64 / before[i] as f64 / m * keep
                            })
                            .sum()
                    };
                    (x, p)
                })
                .collect(),
            _ => return None,
        };
        Some((*var, out))
    }

    /// Relative measure of the AGM ratio and maximum relative degree after
    /// binding `x` (for DRS): `(AGM(ℋ_{s⊎x}) / AGM(ℋ_s), max_F rdeg_F)`, or
    /// `None` when `x` does not join with every edge meeting the attribute.
    pub fn agm_ratio(&self, s: &Binding, x: Value) -> Option<(f64, f64)> {
        let d = self.depth_of(s)?;
        let Step::Var { var, edges } = &self.steps[d] else { return None };
        let mut ops = 0;
        let before = self.counts(edges, s, &mut ops);
        let mut b = s.clone();
        b.set(*var, x);
        let after = self.counts(edges, &b, &mut ops);
        if after.contains(&0) {
            return None;
        }
        let maxr = (0..edges.len())
            .map(|i| after[i] as f64 / before[i] as f64)
            .fold(0.0, f64::max);
        Some((self.ln_ratio(d, edges, &before, &after).exp(), maxr))
    }

    fn depth_of(&self, s: &Binding) -> Option<usize> {
        let bound = s.bound();
        let d = self.steps.iter().take_while(|st| st.vars().is_subset(bound)).count();
        (d < self.steps.len()).then_some(d)
    }

    fn counts(&self, edges: &[usize], s: &Binding, ops: &mut u64) -> Vec<u64> {
        *ops += edges.len() as u64;
        edges.iter().map(|&e| self.query.atom(e).count(s)).collect()
    }

    /// `ln(AGM(ℋ_{s⊎x}) / AGM(ℋ_s))` from the counts of the edges containing
    /// the step's attribute; other edges keep their count.
    fn ln_ratio(&self, d: usize, edges: &[usize], before: &[u64], after: &[u64]) -> f64 {
        let next = &self.next_agm[d];
        let mut ln = 0.0;
        for (i, &e) in edges.iter().enumerate() {
            let w = self.weights[e];
            if next[e] {
                if after[i] == 0 {
                    return f64::NEG_INFINITY;
                }
                ln += w * (after[i] as f64).ln();
            }
            ln -= w * (before[i] as f64).ln();
        }
        ln
    }

    fn leaf_count(&self, s: &Binding, ops: &mut u64) -> f64 {
        *ops += self.leaf.len() as u64;
        self.leaf
            .iter()
            .map(|&(e, x)| self.query.atom(e).distinct(s, x) as f64)
            .product()
    }

    fn branch_size(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        ((self.config.branch * n as f64).ceil() as usize).clamp(1, n)
    }

    /// `∩_F π_v(R_F ⋉ s)`, probing the smallest projection into the others.
    fn intersection(&self, v: Var, edges: &[usize], s: &Binding, ops: &mut u64) -> Vec<Value> {
        let base = self.gj_edge(v, edges, s, ops);
        let mut b = s.clone();
        let mut out = Vec::new();
        self.query.atom(base).for_each_value(s, v, |x| {
            b.set(v, x);
            *ops += edges.len() as u64;
            if edges.iter().all(|&e| e == base || self.query.atom(e).contains(&b)) {
                out.push(x);
            }
        });
        out
    }

    /// `argmin_F |π_v(R_F ⋉ s)|`, ties to the lowest edge id.
    fn gj_edge(&self, v: Var, edges: &[usize], s: &Binding, ops: &mut u64) -> usize {
        *ops += edges.len() as u64;
        edges
            .iter()
            .map(|&e| (self.query.atom(e).distinct(s, VarSet::single(v)), e))
            .min()
            .expect("attribute lies in some edge")
            .1
    }

    fn alley<R: Rng + ?Sized>(&self, d: usize, s: &mut Binding, rng: &mut R, ops: &mut u64) -> f64 {
        let Some(Step::Var { var, edges }) = self.steps.get(d) else {
            return self.leaf_count(s, ops);
        };
        let omega = self.intersection(*var, edges, s, ops);
        let n = omega.len();
        if n == 0 {
            return 0.0;
        }
        let k = self.branch_size(n);
        let mut sum = 0.0;
        if k == n {
            for &x in &omega {
                s.set(*var, x);
                sum += self.alley(d + 1, s, rng, ops);
            }
        } else {
            for i in rand::seq::index::sample(rng, n, k) {
                s.set(*var, omega[i]);
                sum += self.alley(d + 1, s, rng, ops);
            }
        }
        s.unset(*var);
        sum * n as f64 / k as f64
    }

    /// Runs the single-sample steps from `s` to the end, binding the drawn
    /// values into `s`. Returns the path probability, or `None` on rejection.
    fn walk<R: Rng + ?Sized>(&self, s: &mut Binding, rng: &mut R, ops: &mut u64) -> Option<f64> {
        let mut p = 1.0;
        for d in 0..self.steps.len() {
            p *= self.sample_step(d, s, rng, ops)?;
        }
        Some(p)
    }

    fn sample_step<R: Rng + ?Sized>(&self, d: usize, s: &mut Binding, rng: &mut R, ops: &mut u64) -> Option<f64> {
        match &self.steps[d] {
            Step::Edge { edge, vars, checks } => self.wander_step(*edge, *vars, checks, s, rng, ops),
            Step::Var { var, edges } => match self.config.kind {
                StrategyKind::Drs => self.drs_step(d, *var, edges, s, rng, ops),
                StrategyKind::GjSample => self.gj_step(d, *var, edges, s, rng, ops),
                StrategyKind::AlleyPlus => {
                    // A single Alley+ draw with k = 1.
                    let omega = self.intersection(*var, edges, s, ops);
                    if omega.is_empty() {
                        return None;
                    }
                    s.set(*var, omega[rng.random_range(0..omega.len())]);
                    Some(1.0 / omega.len() as f64)
                }
                StrategyKind::WanderJoin => unreachable!("wander join plans edge steps"),
            },
        }
    }

    fn wander_step<R: Rng + ?Sized>(
        &self,
        edge: usize,
        vars: VarSet,
        checks: &[usize],
        s: &mut Binding,
        rng: &mut R,
        ops: &mut u64,
    ) -> Option<f64> {
        let atom = self.query.atom(edge);
        *ops += 3 + checks.len() as u64;
        let before = atom.count(s);
        if before == 0 {
            return None;
        }
        let mut next = s.clone();
        if !atom.sample_into(s, vars, rng, &mut next) {
            return None;
        }
        *s = next;
        // Probability of the projected value under row sampling.
        let p = atom.count(s) as f64 / before as f64;
        checks
            .iter()
            .all(|&e| self.query.atom(e).contains(s))
            .then_some(p)
    }

    fn drs_step<R: Rng + ?Sized>(
        &self,
        d: usize,
        v: Var,
        edges: &[usize],
        s: &mut Binding,
        rng: &mut R,
        ops: &mut u64,
    ) -> Option<f64> {
        let before = self.counts(edges, s, ops);
        if before.contains(&0) {
            return None;
        }
        let star = rng.random_range(0..edges.len());
        *ops += 1;
        let x = self.query.atom(edges[star]).sample_value(s, v, rng)?;
        s.set(v, x);
        let after = self.counts(edges, s, ops);
        // A zero count means `x` misses some edge: not a member.
        if after.contains(&0) {
            return None;
        }
        let (keep, p) = self.drs_accept(d, edges, star, &before, &after);
        (keep > 0.0 && (keep >= 1.0 || rng.random::<f64>() < keep)).then_some(p)
    }

    /// Keep probability of a value drawn through edge `star`, and the
    /// resulting `P(s_I)`.
    fn drs_accept(&self, d: usize, edges: &[usize], star: usize, before: &[u64], after: &[u64]) -> (f64, f64) {
        let m = edges.len();
        // rdeg_i > rdeg_j  ⇔  after_i · before_j > after_j · before_i.
        let cmp = |i: usize, j: usize| {
            (after[i] as u128 * before[j] as u128).cmp(&(after[j] as u128 * before[i] as u128))
        };
        let top = (1..m).fold(0, |best, i| if cmp(i, best).is_gt() { i } else { best });
        let ties = (0..m).filter(|&i| cmp(i, top).is_eq()).count();
        let rdeg = |i: usize| after[i] as f64 / before[i] as f64;
        let ratio = self.ln_ratio(d, edges, before, after).exp();
        let maxr = rdeg(top);
        let (keep, p) = if self.config.any_edge_boost {
            let mass: f64 = (0..m).map(rdeg).sum();
            (ratio / maxr, mass * ratio / (m as f64 * maxr))
        } else if !cmp(star, top).is_eq() {
            (0.0, 0.0)
        } else if self.config.tie_boost {
            (ratio / maxr, ties as f64 * ratio / m as f64)
        } else {
            (ratio / (maxr * ties as f64), ratio / m as f64)
        };
        debug_assert!(keep <= 1.0 + 1e-9, "keep probability {keep} exceeds 1");
        (keep.min(1.0), p)
    }

    /// Probability table of GJ-Sample over `π_v(R_f ⋉ s)`: value, `P`, and
    /// whether the value joins with every edge containing `v`.
    #[allow(clippy::too_many_arguments)]
    fn gj_table(
        &self,
        d: usize,
        v: Var,
        edges: &[usize],
        f: usize,
        before: &[u64],
        s: &Binding,
        ops: &mut u64,
    ) -> Vec<(Value, f64, bool)> {
        let mut b = s.clone();
        let mut table = Vec::new();
        self.query.atom(f).for_each_value(s, v, |x| {
            b.set(v, x);
            *ops += edges.len() as u64;
            let after: Vec<u64> = edges.iter().map(|&e| self.query.atom(e).count(&b)).collect();
            let p = self.ln_ratio(d, edges, before, &after).exp();
            table.push((x, p, !after.contains(&0)));
        });
        table
    }

    fn gj_step<R: Rng + ?Sized>(
        &self,
        d: usize,
        v: Var,
        edges: &[usize],
        s: &mut Binding,
        rng: &mut R,
        ops: &mut u64,
    ) -> Option<f64> {
        let before = self.counts(edges, s, ops);
        if before.contains(&0) {
            return None;
        }
        let f = self.gj_edge(v, edges, s, ops);
        let table = self.gj_table(d, v, edges, f, &before, s, ops);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p, member) in table {
            acc += p;
            if u < acc {
                s.set(v, x);
                return member.then_some(p);
            }
        }
        // The leftover mass is the failure outcome ⊥.
        None
    }
}
