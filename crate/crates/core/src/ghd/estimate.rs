use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::{simple_aggro_yannakakis, AnnotatedRelation, Ghd};
use crate::error::Result;
use crate::estimators::{trial_rng, Estimator, StrategyConfig};
use crate::query::{Binding, Query, VarSet};
use crate::wcoj::{for_each_answer, generic_join};

/// Settings for estimation over a GHD.
#[derive(Clone, Debug, PartialEq)]
pub struct GhdConfig {
    pub strategy: StrategyConfig,
    /// Estimator runs averaged into each `Z[g]`.
    pub budget: usize,
    /// Per-node override of `budget`, indexed by node.
    pub node_budgets: Option<Vec<usize>>,
    /// Count nodes that lie inside one edge exactly instead of sampling.
    pub single_edge_exact: bool,
}

impl GhdConfig {
    pub fn new(strategy: StrategyConfig, budget: usize) -> Self {
        GhdConfig {
            strategy,
            budget: budget.max(1),
            node_budgets: None,
            single_edge_exact: true,
        }
    }

    /// Budget `⌈|𝒱_𝒯| / (ε² δ)⌉` per group: the relative variance of the
    /// product of `|𝒱_𝒯|` independent node estimates is roughly the sum of
    /// theirs, so each node gets an even share of `ε² δ`.
    pub fn for_guarantee(strategy: StrategyConfig, epsilon: f64, delta: f64, nodes: usize) -> Self {
        let k = (nodes.max(1) as f64 / (epsilon * epsilon * delta)).ceil() as usize;
        GhdConfig::new(strategy, k)
    }

    pub fn with_single_edge_exact(mut self, on: bool) -> Self {
        self.single_edge_exact = on;
        self
    }

    pub fn with_node_budgets(mut self, budgets: Vec<usize>) -> Self {
        self.node_budgets = Some(budgets);
        self
    }

    fn budget_of(&self, t: usize) -> usize {
        self.node_budgets.as_ref().and_then(|b| b.get(t).copied()).unwrap_or(self.budget).max(1)
    }
}

/// What happened at one node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReport {
    pub bag: Vec<String>,
    pub grouping: Vec<String>,
    /// Tuples `g_t` in `R_t`.
    pub groups: usize,
    /// Counted exactly as a single-edge node.
    pub exact: bool,
    pub budget: usize,
    pub operations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhdEstimate {
    pub estimate: f64,
    pub nodes: Vec<NodeReport>,
}

/// `R = {(g, Z[g])}` over `G`: for every `g` of `⋈ π_G(R_F)`, `Z[g]` is the
/// mean of `budget` runs of the strategy on the residual query given `g`.
pub fn group_by_card_est<R: Rng + ?Sized>(
    query: &Query,
    g: VarSet,
    strategy: &StrategyConfig,
    budget: usize,
    rng: &mut R,
) -> Result<AnnotatedRelation> {
    Ok(group_by(query, g, strategy, budget, rng)?.0)
}

fn group_by<R: Rng + ?Sized>(
    query: &Query,
    g: VarSet,
    strategy: &StrategyConfig,
    budget: usize,
    rng: &mut R,
) -> Result<(AnnotatedRelation, u64)> {
    let est = Estimator::residual(query, g, strategy.clone())?;
    let mut out = AnnotatedRelation::new(g);
    let mut ops = 0;
    let n = query.n_vars();
    let budget = budget.max(1);
    for tuple in generic_join(query, g, &Binding::new(n)) {
        let s = Binding::from_pairs(n, g.iter().zip(tuple.iter().copied()));
        let mut sum = 0.0;
        for _ in 0..budget {
            let (z, o) = est.estimate_from(&s, rng);
            sum += z;
            ops += o;
        }
        out.insert(tuple, sum / budget as f64);
    }
    Ok((out, ops))
}

/// Exact `Σ_{χ(t) \ G} ℋ_t` by enumerating the node's answers.
fn group_exact(query: &Query, g: VarSet) -> (AnnotatedRelation, u64) {
    let mut counts: BTreeMap<Vec<_>, u64> = BTreeMap::new();
    let mut ops = 0;
    for_each_answer(query, query.scope(), &Binding::new(query.n_vars()), |b| {
        *counts.entry(b.project(g)).or_insert(0) += 1;
        ops += 1;
        true
    });
    (AnnotatedRelation::from_rows(g, counts.into_iter().map(|(t, c)| (t, c as f64))), ops)
}

/// Unbiased estimate of `OUT` over a GHD: each node's sub-query `ℋ_t` is
/// aggregated onto `G(t)` by [`group_by_card_est`] (or exactly, for a node
/// inside one edge), and the annotated relations are combined by
/// [`simple_aggro_yannakakis`]. Node `t` draws from stream `t` of a seed
/// taken from `rng`, so nodes are independent.
pub fn ghd_card_est<R: Rng + ?Sized>(query: &Query, ghd: &Ghd, cfg: &GhdConfig, rng: &mut R) -> Result<GhdEstimate> {
    GhdEstimator::new(query, ghd, cfg)?.run(rng)
}

/// [`ghd_card_est`] prepared once for repeated runs: node sub-queries and
/// estimators are built up front and exact nodes are counted only once.
#[derive(Clone, Debug)]
pub struct GhdEstimator {
    ghd: Ghd,
    nodes: Vec<Node>,
}

#[derive(Clone, Debug)]
struct Node {
    query: Query,
    grouping: VarSet,
    groups: Vec<Vec<crate::store::Value>>,
    work: Work,
    report: NodeReport,
}

#[derive(Clone, Debug)]
enum Work {
    Exact(AnnotatedRelation),
    Sample(Box<Estimator>, usize),
}

impl GhdEstimator {
    pub fn new(query: &Query, ghd: &Ghd, cfg: &GhdConfig) -> Result<Self> {
        ghd.validate(query)?;
        let mut nodes = Vec::with_capacity(ghd.len());
        for t in 0..ghd.len() {
            let bag = ghd.bag(t);
            let g = ghd.grouping(t);
            let sub = query.induced(bag);
            let exact = cfg.single_edge_exact && query.atoms().iter().any(|a| bag.is_subset(a.vars()));
            let budget = cfg.budget_of(t);
            let (work, groups, ops) = if exact {
                let (rel, ops) = group_exact(&sub, g);
                (Work::Exact(rel), Vec::new(), ops)
            } else {
                let est = Estimator::residual(&sub, g, cfg.strategy.clone())?;
                let groups = generic_join(&sub, g, &Binding::new(sub.n_vars()));
                (Work::Sample(Box::new(est), budget), groups, 0)
            };
            let report = NodeReport {
                bag: query.names(bag).into_iter().map(String::from).collect(),
                grouping: query.names(g).into_iter().map(String::from).collect(),
                groups: match &work {
                    Work::Exact(rel) => rel.len(),
                    Work::Sample(..) => groups.len(),
                },
                exact,
                budget: if exact { 0 } else { budget },
                operations: ops,
            };
            nodes.push(Node {
                query: sub,
                grouping: g,
                groups,
                work,
                report,
            });
        }
        Ok(GhdEstimator { ghd: ghd.clone(), nodes })
    }

    pub fn ghd(&self) -> &Ghd {
        &self.ghd
    }

    /// One estimate; `operations` counts the sampling work of this run
    /// (plus, for exact nodes, the one-off enumeration).
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GhdEstimate> {
        let master: u64 = rng.random();
        let mut rels = Vec::with_capacity(self.nodes.len());
        let mut reports = Vec::with_capacity(self.nodes.len());
        for (t, node) in self.nodes.iter().enumerate() {
            let mut report = node.report.clone();
            match &node.work {
                Work::Exact(rel) => rels.push(rel.clone()),
                Work::Sample(est, budget) => {
                    let mut rng = trial_rng(master, t as u64);
                    let n = node.query.n_vars();
                    let mut rel = AnnotatedRelation::new(node.grouping);
                    let mut ops = 0;
                    for tuple in &node.groups {
                        let s = Binding::from_pairs(n, node.grouping.iter().zip(tuple.iter().copied()));
                        let mut sum = 0.0;
                        for _ in 0..*budget {
                            let (z, o) = est.estimate_from(&s, &mut rng);
                            sum += z;
                            ops += o;
                        }
                        rel.insert(tuple.clone(), sum / *budget as f64);
                    }
                    report.operations = ops;
                    rels.push(rel);
                }
            }
            reports.push(report);
        }
        let estimate = simple_aggro_yannakakis(&self.ghd, rels)?;
        Ok(GhdEstimate { estimate, nodes: reports })
    }
}
