//! `cspdd`: generate, solve, check and benchmark bilevel and robust
//! instances from the command line.
//!
//! Exit codes: 0 on success, 1 when the instance (or the checked solution)
//! is infeasible, 2 on any other error.

mod bench;
mod files;
mod record;
mod solve;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cspdd::bilevel::{generate_cpsp, BigMRule, CoeffDist, CpspOptions, PenaltyRule};
use cspdd::robust::{generate_rtsptw, ScenarioStrategy};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cspdd", version, about = "Decision-diagram solvers for bilevel and robust routing problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve an instance file, or write its MILP with `--method emit-lp`.
    Solve(SolveArgs),
    /// Run a parameter sweep described by a JSON config and write a CSV.
    Bench(BenchArgs),
    /// Build the decision diagram of an instance.
    Dd {
        #[command(subcommand)]
        action: DdAction,
    },
    /// Verify a solution file against an instance.
    Check {
        instance: PathBuf,
        solution: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Competitive project selection (bilevel knapsack with blocking).
    Cpsp {
        #[arg(long)]
        n: usize,
        /// Budget tightness t in (0, 1].
        #[arg(long, short)]
        tightness: f64,
        #[arg(long, value_enum, default_value_t = Dist::U25)]
        dist: Dist,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Penalty::FollowerProfit)]
        penalty: Penalty,
        /// Draw follower profits from U(-10, 10).
        #[arg(long)]
        signed_follower_profit: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Robust TSP with time windows and budgeted service-time uncertainty.
    Rtsptw {
        /// Index of the closing depot: customers are 1..n-1.
        #[arg(long)]
        n: usize,
        /// Time-window width.
        #[arg(long, short)]
        width: i64,
        /// Uncertainty budget.
        #[arg(long, short)]
        budget: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// ddr | brute | emit-lp for CPSP, ddro | ip | brute | emit-lp for RTSPTW.
    #[arg(long, short, value_enum)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = BigM::Auto)]
    pub big_m: BigM,
    #[arg(long, value_enum, default_value_t = Strategy::FirstViolated)]
    pub strategy: Strategy,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Where emit-lp writes the model (stdout by default).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// With emit-lp on RTSPTW: add every extreme scenario instead of only δ = l.
    #[arg(long)]
    pub all_scenarios: bool,
    /// Write the solution as JSON (readable by `check`).
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Append a run record to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the per-iteration log of ddro/ip as CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// CSV destination (stdout by default).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, short, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand)]
enum DdAction {
    /// Write the diagram as JSON (layers and arcs).
    Build(DdArgs),
    /// Print node, arc and path counts and layer widths.
    Stats(DdArgs),
    /// Write the diagram in Graphviz format.
    Dot(DdArgs),
}

#[derive(Args)]
pub struct DdArgs {
    pub instance: PathBuf,
    /// Reduce the diagram first.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Method {
    Ddr,
    Ddro,
    Ip,
    Brute,
    EmitLp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    U25,
    U50,
    U100,
}

#[derive(Clone, Copy, ValueEnum)]
enum Penalty {
    FollowerProfit,
    LeaderProfit,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BigM {
    Auto,
    ArcLength,
    General,
}

impl From<BigM> for BigMRule {
    fn from(b: BigM) -> Self {
        match b {
            BigM::Auto => BigMRule::Auto,
            BigM::ArcLength => BigMRule::ArcLength,
            BigM::General => BigMRule::General,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Strategy {
    FirstViolated,
    MostViolated,
}

impl From<Strategy> for ScenarioStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::FirstViolated => ScenarioStrategy::FirstViolated,
            Strategy::MostViolated => ScenarioStrategy::MostViolated,
        }
    }
}

/// What a finished command reports through the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Gen { kind } => {
            let (text, out) = match kind {
                GenKind::Cpsp { n, tightness, dist, seed, penalty, signed_follower_profit, out } => {
                    anyhow::ensure!(n >= 1, "n must be positive");
                    anyhow::ensure!(tightness > 0.0 && tightness <= 1.0, "tightness must lie in (0, 1]");
                    let dist = match dist {
                        Dist::U25 => CoeffDist::U25,
                        Dist::U50 => CoeffDist::U50,
                        Dist::U100 => CoeffDist::U100,
                    };
                    let penalty = match penalty {
                        Penalty::FollowerProfit => PenaltyRule::FollowerProfit,
                        Penalty::LeaderProfit => PenaltyRule::LeaderProfit,
                        Penalty::Zero => PenaltyRule::Zero,
                    };
                    let inst = generate_cpsp(n, tightness, dist, seed, &CpspOptions { penalty, signed_follower_profit });
                    (files::to_json(&inst)?, out)
                }
                GenKind::Rtsptw { n, width, budget, seed, out } => {
                    anyhow::ensure!(n >= 2, "n must be at least 2");
                    anyhow::ensure!(width >= 0 && budget >= 0, "width and budget must be non-negative");
                    (files::to_json(&generate_rtsptw(n, width, budget, seed))?, out)
                }
            };
            files::emit(out.as_deref(), &text)?;
            Ok(Outcome::Ok)
        }
        Command::Solve(args) => solve::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Dd { action } => {
            let (args, what) = match &action {
                DdAction::Build(a) => (a, "build"),
                DdAction::Stats(a) => (a, "stats"),
                DdAction::Dot(a) => (a, "dot"),
            };
            solve::dd(args, what)
        }
        Command::Check { instance, solution } => solve::check(&instance, &solution),
    }
}
