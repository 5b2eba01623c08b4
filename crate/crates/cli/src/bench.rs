//! Parameter sweeps. A config is a JSON object such as
//!
//! ```json
//! { "kind": "cpsp", "n": [10, 12], "tightness": [0.2], "dist": ["u25"],
//!   "seeds": [0, 1, 2, 3, 4], "methods": ["ddr", "brute"], "time_limit": 60 }
//! ```
//!
//! or, for the robust TSP,
//!
//! ```json
//! { "kind": "rtsptw", "n": [8], "width": [20, 40], "budget": [2, 4],
//!   "seeds": [0, 1], "methods": ["ddro", "ip", "brute"], "strategy": "first-violated" }
//! ```
//!
//! Every (instance, method) pair gives one CSV row, in grid order.

use crate::files::{self, Instance};
use crate::record::{write_records, RunRecord, Status};
use crate::solve::{execute, RunOptions};
use crate::{BenchArgs, Method, Outcome};
use anyhow::{bail, Context, Result};
use cspdd::bilevel::{generate_cpsp, BigMRule, CoeffDist, CpspOptions, PenaltyRule};
use cspdd::robust::{generate_rtsptw, ScenarioStrategy};
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BenchConfig {
    Cpsp {
        n: Vec<usize>,
        tightness: Vec<f64>,
        #[serde(default = "default_dist")]
        dist: Vec<CoeffDist>,
        seeds: Vec<u64>,
        methods: Vec<String>,
        /// Seconds per run.
        #[serde(default)]
        time_limit: Option<f64>,
        #[serde(default)]
        penalty: PenaltyRule,
        #[serde(default)]
        signed_follower_profit: bool,
        #[serde(default)]
        big_m: BigMRule,
    },
    Rtsptw {
        n: Vec<usize>,
        width: Vec<i64>,
        budget: Vec<i64>,
        seeds: Vec<u64>,
        methods: Vec<String>,
        #[serde(default)]
        time_limit: Option<f64>,
        #[serde(default)]
        strategy: ScenarioStrategy,
    },
}

fn default_dist() -> Vec<CoeffDist> {
    vec![CoeffDist::U25]
}

fn dist_name(d: CoeffDist) -> &'static str {
    match d {
        CoeffDist::U25 => "u25",
        CoeffDist::U50 => "u50",
        CoeffDist::U100 => "u100",
    }
}

fn parse_methods(names: &[String], allowed: &[(&str, Method)]) -> Result<Vec<Method>> {
    names
        .iter()
        .map(|s| match allowed.iter().find(|(n, _)| n == s) {
            Some(&(_, m)) => Ok(m),
            None => {
                let ok: Vec<&str> = allowed.iter().map(|(n, _)| *n).collect();
                bail!("unknown method {s:?} (expected one of {})", ok.join(", "))
            }
        })
        .collect()
}

/// A grid point, generated lazily inside the worker that solves it.
struct Job {
    id: String,
    make: Box<dyn Fn() -> Instance + Send + Sync>,
    methods: Vec<Method>,
    opts: RunOptions,
}

fn jobs(config: BenchConfig) -> Result<Vec<Job>> {
    let mut out = Vec::new();
    match config {
        BenchConfig::Cpsp { n, tightness, dist, seeds, methods, time_limit, penalty, signed_follower_profit, big_m } => {
            let methods = parse_methods(&methods, &[("ddr", Method::Ddr), ("brute", Method::Brute)])?;
            let opts = RunOptions { big_m, strategy: ScenarioStrategy::default(), time_limit };
            for &n in &n {
                for &t in &tightness {
                    if !(t > 0.0 && t <= 1.0) {
                        bail!("tightness {t} is outside (0, 1]");
                    }
                    for &d in &dist {
                        for &seed in &seeds {
                            let gen = CpspOptions { penalty, signed_follower_profit };
                            out.push(Job {
                                id: format!("cpsp-n{n}-t{t}-{}-s{seed}", dist_name(d)),
                                make: Box::new(move || Instance::Cpsp(generate_cpsp(n, t, d, seed, &gen))),
                                methods: methods.clone(),
                                opts,
                            });
                        }
                    }
                }
            }
        }
        BenchConfig::Rtsptw { n, width, budget, seeds, methods, time_limit, strategy } => {
            let methods =
                parse_methods(&methods, &[("ddro", Method::Ddro), ("ip", Method::Ip), ("brute", Method::Brute)])?;
            let opts = RunOptions { big_m: BigMRule::default(), strategy, time_limit };
            for &n in &n {
                if n < 2 {
                    bail!("RTSPTW needs n >= 2");
                }
                for &w in &width {
                    for &b in &budget {
                        for &seed in &seeds {
                            out.push(Job {
                                id: format!("rtsptw-n{n}-w{w}-b{b}-s{seed}"),
                                make: Box::new(move || Instance::Rtsptw(generate_rtsptw(n, w, b, seed))),
                                methods: methods.clone(),
                                opts,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Instances whose optimal runs disagree on the objective.
pub fn mismatches(records: &[RunRecord]) -> Vec<String> {
    let mut by_instance: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if let (Status::Optimal, Some(z)) = (r.status, r.objective) {
            by_instance.entry(&r.instance).or_default().push(z);
        }
    }
    by_instance
        .into_iter()
        .filter(|(_, zs)| zs.iter().any(|z| (z - zs[0]).abs() > 1e-6 * zs[0].abs().max(1.0)))
        .map(|(id, _)| id.to_string())
        .collect()
}

pub fn run(args: &BenchArgs) -> Result<Outcome> {
    let text = files::read(&args.config)?;
    let config: BenchConfig =
        serde_json::from_str(&text).with_context(|| format!("{} is not a valid bench config", args.config.display()))?;
    let jobs = jobs(config)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build()?;
    let rows: Vec<Vec<RunRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let inst = (job.make)();
                job.methods
                    .iter()
                    .map(|&m| execute(&inst, &job.id, m, &job.opts).map(|(r, _)| r))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let records: Vec<RunRecord> = rows.into_iter().flatten().collect();
    match &args.out {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            write_records(f, &records)?;
        }
        None => write_records(std::io::stdout().lock(), &records)?,
    }
    let bad = mismatches(&records);
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    eprintln!(
        "runs: {}, optimal: {}, infeasible: {}, cap: {}, timeout: {}, objective mismatches: {}",
        records.len(),
        count(Status::Optimal),
        count(Status::Infeasible),
        count(Status::Cap),
        count(Status::Timeout),
        bad.len()
    );
    for id in &bad {
        eprintln!("mismatch: {id}");
    }
    Ok(Outcome::Ok)
}
