//! Join-project queries `π_O(Q)`: sample an answer of the output-only
//! query `Q_O`, keep it if it extends to an answer of `Q`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::driver::{count_successes, prepare};
use crate::estimators::{DriverConfig, DriverMode, EstimateReport, Estimator, StrategyConfig};
use crate::query::{Binding, Query, VarSet};
use crate::store::Value;
use crate::wcoj::generic_join_exists;

/// Uniform sampler over `π_O(Q)`, prepared once.
///
/// `Q_O = ⋈_{F ∈ ℰ_O} π_O(R_F)` is split into connected components, each
/// sampled by its own uniform estimator; a draw that combines them is then
/// kept iff `Q_{𝒱∖O}(s)` is non-empty. Every tuple of `π_O(Q)` is returned
/// by a trial with the same probability, the product of the components'.
#[derive(Clone, Debug)]
pub struct ProjectionSampler {
    query: Query,
    output: VarSet,
    parts: Vec<(VarSet, Estimator)>,
    probability: f64,
}

impl ProjectionSampler {
    /// `strategy` must be uniform (GJ-Sample, or DRS without boosting).
    pub fn new(query: &Query, output: VarSet, strategy: StrategyConfig) -> Result<Self> {
        if output.is_empty() || !output.is_subset(query.scope()) {
            return Err(Error::Query("output attributes must be a non-empty subset of the query's".into()));
        }
        let mut parts = Vec::new();
        let mut probability = 1.0;
        for comp in components(query, output) {
            let est = Estimator::new(&query.induced(comp), strategy.clone())?;
            probability *= est.uniform_probability()?;
            parts.push((comp, est));
        }
        Ok(ProjectionSampler {
            query: query.clone(),
            output,
            parts,
            probability,
        })
    }

    pub fn output(&self) -> VarSet {
        self.output
    }

    /// Connected components of `Q_O`.
    pub fn components(&self) -> Vec<VarSet> {
        self.parts.iter().map(|(c, _)| *c).collect()
    }

    /// Probability that one trial returns a given tuple of `π_O(Q)`.
    pub fn success_probability(&self) -> f64 {
        self.probability
    }

    /// One trial: a tuple over `O` (ascending attributes), or `None`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<Value>> {
        self.trial(rng).0
    }

    fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> (Option<Vec<Value>>, u64) {
        let mut s = Binding::new(self.query.n_vars());
        let mut ops = 0;
        for (comp, est) in &self.parts {
            let (hit, o) = est.uniform_trial(rng);
            ops += o;
            let Some(b) = hit else { return (None, ops) };
            for v in comp.iter() {
                s.set(v, b.at(v));
            }
        }
        ops += 1;
        let rest = self.query.scope().minus(self.output);
        let keep = generic_join_exists(&self.query, rest, &s);
        (keep.then(|| s.project(self.output)), ops)
    }

    /// `|π_O(Q)|` by counting trials until `c` successes; `cfg` must be in
    /// success-count mode.
    pub fn estimate_count(&self, cfg: &DriverConfig) -> Result<EstimateReport> {
        let DriverMode::SuccessCount { c } = cfg.mode else {
            return Err(Error::Unsupported("projection counting needs success-count mode".into()));
        };
        let (pool, mut report) = prepare(cfg)?;
        count_successes(cfg, c, self.probability, pool.as_ref(), &mut report, |rng: &mut ChaCha8Rng| {
            let (t, ops) = self.trial(rng);
            (t.is_some(), ops)
        })?;
        Ok(report)
    }
}

/// Connected components of the hypergraph `{F ∩ O}` over `O`.
fn components(query: &Query, output: VarSet) -> Vec<VarSet> {
    let mut comps: Vec<VarSet> = Vec::new();
    for f in query.atoms().iter().map(|a| a.vars().inter(output)).filter(|f| !f.is_empty()) {
        let mut merged = f;
        comps.retain(|&c| {
            let meets = c.meets(merged);
            if meets {
                merged = merged.union(c);
            }
            !meets
        });
        comps.push(merged);
    }
    comps.sort_by_key(|c| VarSet::min(*c));
    comps
}

/// One trial of [`ProjectionSampler`]; a tuple over `output` or `None`.
pub fn sample_projection<R: Rng + ?Sized>(
    query: &Query,
    output: VarSet,
    strategy: StrategyConfig,
    rng: &mut R,
) -> Result<Option<Vec<Value>>> {
    Ok(ProjectionSampler::new(query, output, strategy)?.sample(rng))
}

/// `|π_O(Q)|` by success counting; see [`ProjectionSampler::estimate_count`].
pub fn estimate_projection_count(
    query: &Query,
    output: VarSet,
    strategy: StrategyConfig,
    cfg: &DriverConfig,
) -> Result<EstimateReport> {
    ProjectionSampler::new(query, output, strategy)?.estimate_count(cfg)
}
