mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact joins, sampling-based join size estimation and uniform join
/// sampling over relation files.
#[derive(Parser, Debug)]
#[command(name = "joinest", version, about)]
pub struct Cli {
    /// Directory holding `<name>.rel` relation files.
    #[arg(long, env = "JOINEST_DB", global = true, default_value = ".")]
    db: PathBuf,
    /// Seed for every random choice; trial `i` uses stream `i` of it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for driver trials. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Emit one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the query exactly and list its answers.
    Join(JoinArgs),
    /// Estimate the number of answers.
    Estimate(EstimateArgs),
    /// Draw uniform samples.
    Sample(SampleArgs),
    /// Fractional hypertree width and the best decomposition found.
    Ghd(QueryArg),
    /// Compare estimators side by side.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct QueryArg {
    /// Query specification (JSON).
    #[arg(long)]
    query: PathBuf,
}

#[derive(Args, Debug)]
struct JoinArgs {
    #[command(flatten)]
    q: QueryArg,
    /// Write answers to this file (CSV) instead of the report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cross-check against the nested-loop join.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Wj,
    Alley,
    Gj,
    Drs,
    Sste,
    Sust,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Geometric,
    SuccessCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    /// Every answer (needs a symmetric relation).
    All,
    /// Canonical answers only.
    Canonical,
}

#[derive(Args, Debug, Clone)]
struct StrategyArgs {
    /// Alley+ branch fraction.
    #[arg(long = "b", default_value_t = 0.5)]
    branch: f64,
    /// Count non-join attributes at the leaf instead of sampling them.
    #[arg(long)]
    skip: bool,
    /// DRS: keep ties for the maximum degree without dividing.
    #[arg(long)]
    tie_boost: bool,
    /// DRS: accept any drawn edge.
    #[arg(long)]
    any_edge_boost: bool,
    /// SSTE/SUST target.
    #[arg(long, value_enum, default_value_t = Target::All)]
    target: Target,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    q: QueryArg,
    #[arg(long, value_enum, default_value_t = Strategy::Drs)]
    strategy: Strategy,
    #[command(flatten)]
    s: StrategyArgs,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Mode::Geometric)]
    mode: Mode,
    /// Successes to wait for in success-count mode.
    #[arg(long, default_value_t = 64)]
    c: u64,
    /// Trials for SSTE/SUST, which have no driver.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Estimate over a GHD (the file's, or the best one found).
    #[arg(long)]
    ghd: bool,
    /// Estimator runs per GHD group; defaults to ⌈nodes/(ε²δ)⌉.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    q: QueryArg,
    #[arg(long, value_enum, default_value_t = Strategy::Drs)]
    strategy: Strategy,
    #[command(flatten)]
    s: StrategyArgs,
    /// Number of trials.
    #[arg(long, default_value_t = 10)]
    n: u64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    q: QueryArg,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Strategy::Wj, Strategy::Alley, Strategy::Gj, Strategy::Drs])]
    strategies: Vec<Strategy>,
    #[command(flatten)]
    s: StrategyArgs,
    /// Trials per strategy.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("report is JSON"));
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}
