use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Estimator;
use crate::error::{Error, Result};

/// How many trials the driver runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverMode {
    /// Chebyshev sizing `N = U_var / (ε² δ OUT²)` with a geometric search on
    /// the unknown `OUT`, starting from `AGM` and halving.
    Geometric,
    /// Repeat uniform sampling until `c` trials succeed.
    SuccessCount { c: u64 },
}

/// Driver settings. Trial `i` draws from [`trial_rng`]`(seed, i)`, so the
/// result depends only on the seed, never on `threads`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: DriverMode,
    pub seed: u64,
    pub threads: usize,
    /// Report the median of this many group means instead of the mean.
    pub median_groups: Option<usize>,
    /// Hard cap on the total number of trials.
    pub max_trials: Option<u64>,
}

impl DriverConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        DriverConfig {
            epsilon,
            delta,
            mode: DriverMode::Geometric,
            seed,
            threads: 1,
            median_groups: None,
            max_trials: None,
        }
    }

    pub fn success_count(mut self, c: u64) -> Self {
        self.mode = DriverMode::SuccessCount { c };
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}

/// Outcome of a driver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// The estimate `Z`.
    pub estimate: f64,
    /// Trials across all rounds.
    pub trials: u64,
    /// Trials of the round that produced `estimate`.
    pub final_trials: u64,
    /// Successful uniform samples (success-count mode).
    pub successes: Option<u64>,
    /// Query-model operations across all trials, `T`.
    pub operations: u64,
    /// Assumed `OUT` of the last round (geometric mode).
    pub assumed_out: f64,
    pub rounds: usize,
    pub declared_zero: bool,
    /// The trial cap cut the run short.
    pub truncated: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub c: Option<u64>,
    pub seed: u64,
}

/// Generator of trial `index` under `master`: ChaCha8 seeded with
/// `master`, on stream `index`.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Runs `est` until the estimate is a `(1 ± ε)`-approximation with
/// probability at least `1 − δ`, as far as the strategy's variance bound
/// allows.
///
/// In geometric mode round `j` assumes `OUT = AGM / 2^j`, runs
/// `⌈U_var / (ε² δ OUT²)⌉` trials, and stops once the mean reaches the
/// assumption. When the assumption drops below 1 the round's estimate is
/// returned as is, or `0` is declared if no trial ever found an answer.
///
/// In success-count mode (uniform strategies only) the estimate is
/// `(c − 1) / (T − 1) / p` after `T` trials reach `c` successes, where `p`
/// is the per-answer success probability; this form is unbiased.
pub fn estimate_with_guarantee(est: &Estimator, cfg: &DriverConfig) -> Result<EstimateReport> {
    if !est.bound.is_empty() {
        return Err(Error::Unsupported("the driver estimates the full query".into()));
    }
    let (pool, mut report) = prepare(cfg)?;
    match cfg.mode {
        DriverMode::Geometric => geometric(est, cfg, pool.as_ref(), &mut report),
        DriverMode::SuccessCount { c } => success_count(est, cfg, c, pool.as_ref(), &mut report)?,
    }
    Ok(report)
}

/// Checks `ε`, `δ` and builds the pool and an empty report.
pub(crate) fn prepare(cfg: &DriverConfig) -> Result<(Option<rayon::ThreadPool>, EstimateReport)> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0 && cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Query(format!(
            "ε = {} and δ = {} must lie in (0, 1)",
            cfg.epsilon, cfg.delta
        )));
    }
    let pool = (cfg.threads > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build())
        .transpose()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let report = EstimateReport {
        estimate: 0.0,
        trials: 0,
        final_trials: 0,
        successes: None,
        operations: 0,
        assumed_out: 0.0,
        rounds: 0,
        declared_zero: false,
        truncated: false,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        c: None,
        seed: cfg.seed,
    };
    Ok((pool, report))
}

fn geometric(est: &Estimator, cfg: &DriverConfig, pool: Option<&rayon::ThreadPool>, r: &mut EstimateReport) {
    let agm = est.agm();
    let scale = cfg.epsilon * cfg.epsilon * cfg.delta;
    let mut assumed = if agm.is_zero() { 0.0 } else { agm.value() };
    let mut any_hit = false;
    loop {
        let want = if assumed > 0.0 {
            (est.variance_bound(assumed) / (scale * assumed * assumed)).ceil().max(1.0)
        } else {
            1.0
        };
        let mut n = want.min(u64::MAX as f64) as u64;
        if let Some(cap) = cfg.max_trials {
            if r.trials + n > cap {
                n = cap.saturating_sub(r.trials).max(1);
                r.truncated = true;
            }
        }
        let out = run(pool, cfg.seed, r.trials, n, |rng| est.estimate_from(&empty(est), rng));
        let values: Vec<f64> = out.iter().map(|x| x.0).collect();
        r.trials += n;
        r.final_trials = n;
        r.operations += out.iter().map(|x| x.1).sum::<u64>();
        r.rounds += 1;
        r.assumed_out = assumed;
        any_hit |= values.iter().any(|&z| z > 0.0);
        let z = aggregate(&values, cfg.median_groups);
        if z >= assumed || r.truncated {
            r.estimate = z;
            r.declared_zero = !any_hit && z == 0.0;
            return;
        }
        if assumed < 1.0 {
            r.declared_zero = !any_hit;
            r.estimate = if any_hit { z } else { 0.0 };
            return;
        }
        assumed /= 2.0;
    }
}

fn success_count(
    est: &Estimator,
    cfg: &DriverConfig,
    c: u64,
    pool: Option<&rayon::ThreadPool>,
    r: &mut EstimateReport,
) -> Result<()> {
    let p = est.uniform_probability()?;
    count_successes(cfg, c, p, pool, r, |rng| {
        let (b, ops) = est.uniform_trial(rng);
        (b.is_some(), ops)
    })
}

/// Success-count estimation for any trial that succeeds on each of the
/// `OUT` targets with probability `p`.
pub(crate) fn count_successes<F>(
    cfg: &DriverConfig,
    c: u64,
    p: f64,
    pool: Option<&rayon::ThreadPool>,
    r: &mut EstimateReport,
    trial: F,
) -> Result<()>
where
    F: Fn(&mut ChaCha8Rng) -> (bool, u64) + Sync,
{
    if c == 0 {
        return Err(Error::Query("success count c must be positive".into()));
    }
    r.c = Some(c);
    r.rounds = 1;
    if p == 0.0 {
        r.trials = 1;
        r.final_trials = 1;
        r.successes = Some(0);
        r.declared_zero = true;
        return Ok(());
    }
    // With OUT ≥ 1 the expected trial count is at most c / p.
    let cap = cfg
        .max_trials
        .unwrap_or(u64::MAX)
        .min((16.0 * c as f64 / p).ceil().min(u64::MAX as f64) as u64);
    let batch = if pool.is_some() { 4096 } else { 256 };
    let mut hits = 0;
    'outer: while r.trials < cap {
        let n = batch.min(cap - r.trials);
        let found = run(pool, cfg.seed, r.trials, n, |rng| {
            let (hit, ops) = trial(rng);
            (if hit { 1.0 } else { 0.0 }, ops)
        });
        // Only the prefix up to the c-th success counts, whatever the batch.
        for (f, ops) in found {
            r.trials += 1;
            r.operations += ops;
            hits += (f > 0.0) as u64;
            if hits == c {
                break 'outer;
            }
        }
    }
    r.final_trials = r.trials;
    r.successes = Some(hits);
    r.truncated = hits < c;
    r.declared_zero = hits == 0;
    r.estimate = if hits == 0 {
        0.0
    } else if hits == c && c >= 2 && r.trials >= 2 {
        (c - 1) as f64 / (r.trials - 1) as f64 / p
    } else {
        hits as f64 / r.trials as f64 / p
    };
    Ok(())
}

fn empty(est: &Estimator) -> crate::query::Binding {
    crate::query::Binding::new(est.query.n_vars())
}

/// Runs trials `start..start + n`; results come back in index order.
fn run<F>(pool: Option<&rayon::ThreadPool>, seed: u64, start: u64, n: u64, f: F) -> Vec<(f64, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> (f64, u64) + Sync,
{
    let one = |i: u64| f(&mut trial_rng(seed, start + i));
    match pool {
        Some(pool) => pool.install(|| (0..n).into_par_iter().map(one).collect()),
        None => (0..n).map(one).collect(),
    }
}

fn aggregate(values: &[f64], groups: Option<usize>) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    match groups {
        Some(g) if g > 1 && values.len() >= g => {
            let size = values.len() / g;
            let mut means: Vec<f64> = values.chunks(size).take(g).map(mean).collect();
            means.sort_by(f64::total_cmp);
            means[g / 2]
        }
        _ => mean(values),
    }
}
