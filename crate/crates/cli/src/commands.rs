use std::io::Write;

use joinest::component::{self, ComponentSampler};
use joinest::conjunctive::ProjectionSampler;
use joinest::estimators::{estimate_with_guarantee, trial_rng, DriverConfig, Estimator, StrategyConfig};
use joinest::exact_weight::WeightTables;
use joinest::ghd::{fhtw, Ghd, GhdConfig, GhdEstimator};
use joinest::wcoj::{brute_force_join, distinct, generic_join};
use joinest::{Binding, Query, VarSet};
use serde_json::{json, Value};

use crate::input::{Failure, Input};
use crate::report::{Report, Table};
use crate::{BenchArgs, Cli, Command, EstimateArgs, JoinArgs, Mode, SampleArgs, Strategy, StrategyArgs, Target};

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let (query_file, name) = match &cli.command {
        Command::Join(a) => (&a.q.query, "join"),
        Command::Estimate(a) => (&a.q.query, "estimate"),
        Command::Sample(a) => (&a.q.query, "sample"),
        Command::Ghd(a) => (&a.query, "ghd"),
        Command::Bench(a) => (&a.q.query, "bench"),
    };
    let input = Input::load(&cli.db, query_file)?;
    let mut r = Report::default();
    r.field("command", name)
        .field("query", query_file.display().to_string())
        .field("input_sha256", input.hash.clone())
        .field("seed", cli.seed);
    match &cli.command {
        Command::Join(a) => join(&input, a, &mut r)?,
        Command::Estimate(a) => estimate(cli, &input, a, &mut r)?,
        Command::Sample(a) => sample(cli, &input, a, &mut r)?,
        Command::Ghd(_) => ghd(&input, &mut r)?,
        Command::Bench(a) => bench(cli, &input, a, &mut r)?,
    }
    Ok(r)
}

fn names(q: &Query, vars: VarSet) -> Value {
    json!(q.names(vars))
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn join(input: &Input, a: &JoinArgs, r: &mut Report) -> Result<(), Failure> {
    let q = &input.query;
    let o = input.projection()?.unwrap_or(q.scope());
    let answers = generic_join(q, o, &Binding::new(q.n_vars()));
    r.field("attributes", names(q, o)).field("out", answers.len());
    if a.oracle {
        let pos: Vec<usize> = {
            let all: Vec<_> = q.scope().iter().collect();
            o.iter().map(|v| all.iter().position(|&x| x == v).expect("output in scope")).collect()
        };
        let mut reference = distinct(brute_force_join(q).into_iter().map(|t| pos.iter().map(|&p| t[p]).collect()).collect());
        let mut mine = answers.clone();
        mine.sort();
        reference.sort();
        if mine != reference {
            return Err(Failure::Runtime(format!(
                "generic join found {} answers, nested loops {}",
                mine.len(),
                reference.len()
            )));
        }
        r.field("oracle", "agrees");
    }
    match &a.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| Failure::Load(format!("{}: {e}", path.display())))?;
            writeln!(f, "{}", q.names(o).join(",")).map_err(runtime)?;
            for t in &answers {
                writeln!(f, "{}", input.decode(t).join(",")).map_err(runtime)?;
            }
            r.field("written", path.display().to_string());
        }
        None => {
            let cols = q.names(o);
            let mut t = Table::new("answers", &cols);
            for a in &answers {
                t.push(input.decode(a).into_iter().map(Value::from).collect());
            }
            r.table(t);
        }
    }
    Ok(())
}

fn strategy_config(st: Strategy, s: &StrategyArgs) -> Result<StrategyConfig, Failure> {
    let base = match st {
        Strategy::Wj => StrategyConfig::wander_join(),
        Strategy::Alley => StrategyConfig::alley_plus(s.branch),
        Strategy::Gj => StrategyConfig::gj_sample(),
        Strategy::Drs => StrategyConfig::drs(),
        other => return Err(Failure::Validate(format!("{other:?} is not a sample-space strategy"))),
    };
    if st == Strategy::Alley && !(s.branch > 0.0 && s.branch <= 1.0) {
        return Err(Failure::Validate(format!("branch fraction {} is not in (0, 1]", s.branch)));
    }
    Ok(base.with_skip(s.skip).with_tie_boost(s.tie_boost).with_any_edge_boost(s.any_edge_boost))
}

fn component_target(t: Target) -> component::Target {
    match t {
        Target::All => component::Target::AllAnswers,
        Target::Canonical => component::Target::Canonical,
    }
}

fn strategy_name(st: Strategy) -> &'static str {
    match st {
        Strategy::Wj => "wander-join",
        Strategy::Alley => "alley+",
        Strategy::Gj => "gj-sample",
        Strategy::Drs => "drs",
        Strategy::Sste => "sste",
        Strategy::Sust => "sust",
        Strategy::Exact => "exact-weight",
    }
}

fn add_object(r: &mut Report, v: Value) {
    if let Value::Object(m) = v {
        for (k, v) in m.into_iter().filter(|(k, _)| k != "seed") {
            r.field(&k, v);
        }
    }
}

fn estimate(cli: &Cli, input: &Input, a: &EstimateArgs, r: &mut Report) -> Result<(), Failure> {
    let q = &input.query;
    r.field("strategy", strategy_name(a.strategy));
    if let Some(o) = input.projection()? {
        let sampler = ProjectionSampler::new(q, o, strategy_config(a.strategy, &a.s)?)?;
        let cfg = DriverConfig::new(a.epsilon, a.delta, cli.seed).success_count(a.c).with_threads(cli.threads);
        let rep = sampler.estimate_count(&cfg)?;
        r.field("projection", names(q, o)).field("components", sampler.components().len());
        add_object(r, serde_json::to_value(rep).map_err(runtime)?);
        return Ok(());
    }
    match a.strategy {
        Strategy::Sste | Strategy::Sust => {
            let cs = ComponentSampler::new(q, component_target(a.s.target))?;
            let mut sum = 0.0;
            let mut sq = 0.0;
            for i in 0..a.trials {
                let mut rng = trial_rng(cli.seed, i);
                let z = match a.strategy {
                    Strategy::Sste => cs.sste_estimate(&mut rng),
                    _ => cs.sust_estimate(&mut rng)?,
                };
                sum += z;
                sq += z * z;
            }
            let n = a.trials.max(1) as f64;
            let mean = sum / n;
            let var = if n > 1.0 { (sq - n * mean * mean) / (n - 1.0) } else { 0.0 };
            r.field("target", format!("{:?}", a.s.target).to_lowercase())
                .field("trials", a.trials)
                .field("estimate", mean)
                .field("standard_error", (var.max(0.0) / n).sqrt());
        }
        Strategy::Exact => {
            let w = WeightTables::new(q)?;
            r.field("estimate", w.total()).field("exact", true);
        }
        _ if a.ghd => {
            let strategy = strategy_config(a.strategy, &a.s)?;
            let ghd = match input.ghd()? {
                Some(g) => g,
                None => fhtw(q, &q.sizes()).0,
            };
            let cfg = match a.budget {
                Some(k) => GhdConfig::new(strategy, k),
                None => GhdConfig::for_guarantee(strategy, a.epsilon, a.delta, ghd.len()),
            };
            let est = GhdEstimator::new(q, &ghd, &cfg)?.run(&mut trial_rng(cli.seed, 0))?;
            r.field("estimate", est.estimate).field("budget", cfg.budget);
            let mut t = Table::new("nodes", &["node", "bag", "grouping", "groups", "exact", "budget", "operations"]);
            for (i, n) in est.nodes.iter().enumerate() {
                t.push(vec![
                    json!(i),
                    json!(n.bag),
                    json!(n.grouping),
                    json!(n.groups),
                    json!(n.exact),
                    json!(n.budget),
                    json!(n.operations),
                ]);
            }
            r.table(t);
        }
        _ => {
            let est = Estimator::new(q, strategy_config(a.strategy, &a.s)?)?;
            let mut cfg = DriverConfig::new(a.epsilon, a.delta, cli.seed).with_threads(cli.threads);
            if a.mode == Mode::SuccessCount {
                cfg = cfg.success_count(a.c);
            }
            let rep = estimate_with_guarantee(&est, &cfg)?;
            r.field("agm", est.agm().value());
            add_object(r, serde_json::to_value(rep).map_err(runtime)?);
        }
    }
    Ok(())
}

fn sample(cli: &Cli, input: &Input, a: &SampleArgs, r: &mut Report) -> Result<(), Failure> {
    let q = &input.query;
    let projection = input.projection()?;
    let o = projection.unwrap_or(q.scope());
    type Draw<'a> = Box<dyn Fn(u64) -> Result<Option<Vec<joinest::Value>>, Failure> + 'a>;
    let seed = cli.seed;
    let draw: Draw = match (projection, a.strategy) {
        (Some(o), st) => {
            let s = ProjectionSampler::new(q, o, strategy_config(st, &a.s)?)?;
            Box::new(move |i| Ok(s.sample(&mut trial_rng(seed, i))))
        }
        (None, Strategy::Exact) => {
            let w = WeightTables::new(q)?;
            if w.total() == 0 {
                Box::new(|_| Ok(None))
            } else {
                Box::new(move |i| Ok(Some(w.sample(&mut trial_rng(seed, i))?.project(o))))
            }
        }
        (None, Strategy::Sust) => {
            let cs = ComponentSampler::new(q, component_target(a.s.target))?;
            Box::new(move |i| Ok(cs.sust_sample(&mut trial_rng(seed, i))?.map(|b| b.project(o))))
        }
        (None, st) => {
            let est = Estimator::new(q, strategy_config(st, &a.s)?)?;
            est.uniform_probability()?;
            Box::new(move |i| Ok(est.uniform_sample(&mut trial_rng(seed, i))?.map(|b| b.project(o))))
        }
    };
    let mut t = Table::new("samples", &["trial", "success", "answer"]);
    let mut hits = 0u64;
    for i in 0..a.n {
        let got = draw(i)?;
        hits += got.is_some() as u64;
        t.push(vec![
            json!(i),
            json!(got.is_some()),
            got.map_or(Value::Null, |x| json!(input.decode(&x))),
        ]);
    }
    r.field("strategy", strategy_name(a.strategy))
        .field("attributes", names(q, o))
        .field("trials", a.n)
        .field("successes", hits)
        .table(t);
    Ok(())
}

fn ghd_table(q: &Query, ghd: &Ghd, name: &str) -> Table {
    let widths = ghd.node_widths(q, &q.sizes());
    let mut t = Table::new(name, &["node", "parent", "bag", "rho"]);
    for node in 0..ghd.len() {
        t.push(vec![
            json!(node),
            ghd.parent(node).map_or(Value::Null, |p| json!(p)),
            names(q, ghd.bag(node)),
            json!(widths[node]),
        ]);
    }
    t
}

fn ghd(input: &Input, r: &mut Report) -> Result<(), Failure> {
    let q = &input.query;
    let sizes = q.sizes();
    let (best, width) = fhtw(q, &sizes);
    r.field("fhtw", width).field("nodes", best.len());
    r.table(ghd_table(q, &best, "best"));
    if let Some(given) = input.ghd()? {
        r.field("given_width", given.width(q, &sizes));
        r.table(ghd_table(q, &given, "given"));
    }
    Ok(())
}

fn bench(cli: &Cli, input: &Input, a: &BenchArgs, r: &mut Report) -> Result<(), Failure> {
    let q = &input.query;
    if input.projection()?.is_some() {
        return Err(Failure::Validate("bench compares full-join estimators; drop `projection`".into()));
    }
    let out = generic_join(q, q.scope(), &Binding::new(q.n_vars())).len() as f64;
    r.field("out", out).field("trials", a.trials);
    let columns = ["strategy", "mean", "variance", "operations", "bound", "variance/bound", "note"];
    let mut t = Table::new("strategies", &columns);
    for &st in &a.strategies {
        match bench_one(cli, q, st, a, out) {
            Ok((values, ops, bound)) => {
                let n = values.len().max(1) as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                let ratio = if bound > 0.0 { json!(var / bound) } else { Value::Null };
                t.push(vec![
                    json!(strategy_name(st)),
                    json!(mean),
                    json!(var),
                    ops.map_or(Value::Null, |o| json!(o)),
                    json!(bound),
                    ratio,
                    Value::Null,
                ]);
            }
            Err(f) => {
                let mut row = vec![json!(strategy_name(st))];
                row.extend(std::iter::repeat_n(Value::Null, 5));
                row.push(json!(f.message()));
                t.push(row);
            }
        }
    }
    r.table(t);
    Ok(())
}

/// Per-trial estimates, metered operations (if any) and the variance bound.
fn bench_one(cli: &Cli, q: &Query, st: Strategy, a: &BenchArgs, out: f64) -> Result<(Vec<f64>, Option<u64>, f64), Failure> {
    let mut values = Vec::with_capacity(a.trials as usize);
    match st {
        Strategy::Sste | Strategy::Sust => {
            let cs = ComponentSampler::new(q, component_target(a.s.target))?;
            for i in 0..a.trials {
                let mut rng = trial_rng(cli.seed, i);
                values.push(match st {
                    Strategy::Sste => cs.sste_estimate(&mut rng),
                    _ => cs.sust_estimate(&mut rng)?,
                });
            }
            Ok((values, None, cs.variance_bound(out)))
        }
        Strategy::Exact => {
            let w = WeightTables::new(q)?;
            values.resize(a.trials as usize, w.total() as f64);
            Ok((values, None, 0.0))
        }
        _ => {
            let est = Estimator::new(q, strategy_config(st, &a.s)?)?;
            let empty = Binding::new(q.n_vars());
            let mut ops = 0;
            for i in 0..a.trials {
                let (z, o) = est.estimate_from(&empty, &mut trial_rng(cli.seed, i));
                values.push(z);
                ops += o;
            }
            Ok((values, Some(ops), est.variance_bound(out)))
        }
    }
}
