use crate::files::{self, Instance, SolutionFile};
use crate::record::{append_record, RunRecord, Status};
use crate::{DdArgs, Method, Outcome, SolveArgs};
use anyhow::{anyhow, bail, Context, Result};
use cspdd::bilevel::{
    brute_force_bilevel, build_follower_dd, build_single_level_milp, certify, compute_big_m, prepare_follower,
    solve_ddr_with, BigMRule, BilevelSolution, CpspInstance, DdrOptions,
};
use cspdd::dd::{export_dot, reduce, Arc, DecisionDiagram};
use cspdd::milp::{write_lp_file, SolverOptions};
use cspdd::robust::{
    brute_force_robust, build_ip_baseline, build_tsp_dd, enumerate_scenarios, separate, solve_ip_augmenting,
    solve_state_augmenting_with, worst_case_times, AugmentOptions, IterationRecord, RobustSolution, RtsptwInstance,
    ScenarioStrategy,
};
use cspdd::Deadline;
use serde::Serialize;
use std::path::Path;
use std::time::{Duration, Instant};

/// Residual above which a bilevel certificate is rejected.
const CERT_TOL: f64 = 1e-6;

pub enum Solved {
    Bilevel(BilevelSolution, BigMRule),
    Robust(RobustSolution),
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub big_m: BigMRule,
    pub strategy: ScenarioStrategy,
    pub time_limit: Option<f64>,
}

fn deadline(limit: Option<f64>) -> Deadline {
    limit.map_or(Deadline::none(), |s| Deadline::after(Duration::from_secs_f64(s.max(0.0))))
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ddr => "ddr",
        Method::Ddro => "ddro",
        Method::Ip => "ip",
        Method::Brute => "brute",
        Method::EmitLp => "emit-lp",
    }
}

/// Solves `inst` with `method` and records the run. Solver failures end up
/// in the record, never as an `Err`.
pub fn execute(inst: &Instance, id: &str, method: Method, opts: &RunOptions) -> Result<(RunRecord, Option<Solved>)> {
    let name = method_name(method);
    let seed = inst.seed();
    let start = Instant::now();
    let dl = deadline(opts.time_limit);
    let (result, iterations) = match (inst, method) {
        (Instance::Cpsp(c), Method::Ddr | Method::Brute) => {
            let b = c.to_bilevel();
            let r = if method == Method::Ddr {
                let o = DdrOptions { big_m: opts.big_m, solver: SolverOptions { deadline: dl, ..Default::default() } };
                solve_ddr_with(&b, &o)
            } else {
                brute_force_bilevel(&b)
            };
            let iters = match (&r, method) {
                (Ok(s), Method::Ddr) => Some(s.nodes),
                _ => None,
            };
            (r.map(|s| Solved::Bilevel(s, opts.big_m.resolve(&b))), iters)
        }
        (Instance::Rtsptw(r), Method::Ddro | Method::Ip | Method::Brute) => {
            let o = AugmentOptions { strategy: opts.strategy, deadline: dl, ..Default::default() };
            let res = match method {
                Method::Ddro => solve_state_augmenting_with(r, &o),
                Method::Ip => solve_ip_augmenting(r, &o),
                _ => brute_force_robust(r),
            };
            let iters = match (&res, method) {
                (Ok(s), Method::Ddro | Method::Ip) => Some(s.log.len()),
                _ => None,
            };
            (res.map(Solved::Robust), iters)
        }
        (Instance::Cpsp(_), m) => bail!("method {} does not apply to CPSP instances (use ddr, brute or emit-lp)", method_name(m)),
        (Instance::Rtsptw(_), m) => {
            bail!("method {} does not apply to RTSPTW instances (use ddro, ip, brute or emit-lp)", method_name(m))
        }
    };
    let time_s = start.elapsed().as_secs_f64();
    Ok(match result {
        Ok(solved) => {
            let objective = match &solved {
                Solved::Bilevel(s, _) => s.leader_objective,
                Solved::Robust(s) => s.cost as f64,
            };
            let record = RunRecord {
                instance: id.to_string(),
                method: name.to_string(),
                status: Status::Optimal,
                objective: Some(objective),
                time_s,
                iterations,
                seed,
                note: String::new(),
            };
            (record, Some(solved))
        }
        Err(e) => (RunRecord::failed(id, name, seed, time_s, &e), None),
    })
}

pub fn run(args: &SolveArgs) -> Result<Outcome> {
    let inst = files::load_instance(&args.instance)?;
    if args.method == Method::EmitLp {
        let model = match &inst {
            Instance::Cpsp(c) => {
                let b = c.to_bilevel();
                let (dd, rule) = prepare_follower(&b, args.big_m.into())?;
                let m = compute_big_m(&b, &dd, rule)?;
                build_single_level_milp(&b, &dd, &m)
            }
            Instance::Rtsptw(r) => {
                let scenarios = if args.all_scenarios { enumerate_scenarios(r, None)? } else { vec![r.nominal()] };
                build_ip_baseline(r, &scenarios)
            }
        };
        files::emit(args.out.as_deref(), &write_lp_file(&model))?;
        return Ok(Outcome::Ok);
    }
    let id = args.instance.file_stem().map_or_else(|| "instance".to_string(), |s| s.to_string_lossy().into_owned());
    let opts = RunOptions { big_m: args.big_m.into(), strategy: args.strategy.into(), time_limit: args.time_limit };
    let (record, solved) = execute(&inst, &id, args.method, &opts)?;
    if let Some(p) = &args.csv {
        append_record(p, &record)?;
    }
    println!("instance: {id}");
    println!("method: {}", record.method);
    println!("status: {}", status_name(record.status));
    println!("time: {:.3} s", record.time_s);
    let Some(solved) = solved else {
        return match record.status {
            Status::Infeasible => Ok(Outcome::Infeasible),
            _ => Err(anyhow!(record.note)),
        };
    };
    match (&inst, &solved) {
        (Instance::Cpsp(c), Solved::Bilevel(s, rule)) => report_bilevel(c, s, *rule)?,
        (Instance::Rtsptw(r), Solved::Robust(s)) => {
            report_robust(r, s);
            if let Some(p) = &args.log {
                write_log(p, &s.log)?;
            }
        }
        _ => unreachable!("solution kind follows the instance kind"),
    }
    if let Some(p) = &args.solution {
        let file = match solved {
            Solved::Bilevel(solution, big_m) => SolutionFile::Bilevel { big_m, solution },
            Solved::Robust(solution) => SolutionFile::Robust { solution },
        };
        files::emit(Some(p), &files::to_json(&file)?)?;
    }
    Ok(Outcome::Ok)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Cap => "cap",
        Status::Timeout => "timeout",
    }
}

fn ones(x: &[u8]) -> String {
    let v: Vec<String> = x.iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| (j + 1).to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn report_bilevel(c: &CpspInstance, s: &BilevelSolution, rule: BigMRule) -> Result<()> {
    let b = c.to_bilevel();
    println!("objective: {}", s.leader_objective);
    println!("leader projects: {}", ones(&s.x_leader));
    println!("follower projects: {}", ones(&s.x_follower));
    println!("follower objective: {}", s.follower_objective);
    if !s.pi.is_empty() {
        println!("nodes: {}", s.nodes);
        let cert = certify(&b, s, rule)?;
        println!(
            "certificate: dual feasibility {:.2e}, strong duality {:.2e}, linearized {:.2e} ({})",
            cert.dual_feasibility,
            cert.strong_duality,
            cert.linearized,
            if cert.max_residual() <= CERT_TOL { "ok" } else { "FAILED" }
        );
    }
    match b.verify(s) {
        Ok(()) => println!("follower response: optimal under the blocking"),
        Err(e) => println!("follower response: FAILED ({e})"),
    }
    Ok(())
}

fn report_robust(r: &RtsptwInstance, s: &RobustSolution) {
    println!("objective: {}", s.cost);
    let route: Vec<String> = s.route.iter().map(|v| v.to_string()).collect();
    println!("route: {}", route.join(" "));
    println!("scenarios: {}", s.scenarios.len());
    if !s.log.is_empty() {
        println!("iteration  objective  scenarios  labels  time_ms");
        for it in &s.log {
            println!("{:>9}  {:>9}  {:>9}  {:>6}  {:>7.2}", it.iteration, it.objective, it.scenarios, it.labels, it.time_ms);
        }
    }
    let worst: Vec<String> = worst_case_times(r, &s.route).iter().map(|t| t.to_string()).collect();
    println!("worst-case arrivals: {}", worst.join(" "));
    match separate(r, &s.route) {
        None => println!("robust check: ok"),
        Some(v) => println!("robust check: FAILED at vertex {}", v.vertex),
    }
}

#[derive(Serialize)]
struct LogRow<'a> {
    iteration: usize,
    objective: i64,
    scenarios: usize,
    labels: usize,
    time_ms: f64,
    route: &'a str,
}

fn write_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for it in log {
        let route: Vec<String> = it.route.iter().map(|v| v.to_string()).collect();
        w.serialize(LogRow {
            iteration: it.iteration,
            objective: it.objective,
            scenarios: it.scenarios,
            labels: it.labels,
            time_ms: it.time_ms,
            route: &route.join(" "),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn check(instance: &Path, solution: &Path) -> Result<Outcome> {
    let inst = files::load_instance(instance)?;
    let sol = files::load_solution(solution)?;
    let problems = match (&inst, &sol) {
        (Instance::Cpsp(c), SolutionFile::Bilevel { big_m, solution }) => {
            let b = c.to_bilevel();
            let mut problems = Vec::new();
            if let Err(e) = b.verify(solution) {
                problems.push(e.to_string());
            } else if !solution.pi.is_empty() {
                match certify(&b, solution, *big_m) {
                    Ok(cert) if cert.max_residual() <= CERT_TOL => {}
                    Ok(cert) => problems.push(format!("certificate residual {:.2e}", cert.max_residual())),
                    Err(e) => problems.push(e.to_string()),
                }
            }
            problems
        }
        (Instance::Rtsptw(r), SolutionFile::Robust { solution }) => {
            if let Err(e) = r.validate_route(&solution.route) {
                vec![e.to_string()]
            } else {
                let mut problems = Vec::new();
                let cost = r.route_cost(&solution.route);
                if cost != solution.cost {
                    problems.push(format!("route costs {cost}, the file says {}", solution.cost));
                }
                if let Some(v) = separate(r, &solution.route) {
                    problems.push(format!("deadline of vertex {} is missed under scenario {:?}", v.vertex, v.scenario.delta));
                }
                problems
            }
        }
        _ => bail!("the solution does not match the instance kind"),
    };
    if problems.is_empty() {
        println!("ok");
        Ok(Outcome::Ok)
    } else {
        for p in &problems {
            println!("invalid: {p}");
        }
        Ok(Outcome::Infeasible)
    }
}

#[derive(Serialize)]
struct DdJson<'a> {
    num_vars: usize,
    root: usize,
    terminal: usize,
    layers: &'a [Vec<usize>],
    arcs: &'a [Arc],
}

pub fn dd(args: &DdArgs, what: &str) -> Result<Outcome> {
    let mut dd: DecisionDiagram = match files::load_instance(&args.instance)? {
        Instance::Cpsp(c) => build_follower_dd(&c.to_bilevel())?,
        Instance::Rtsptw(r) => build_tsp_dd(&r)?,
    };
    if args.reduced {
        dd = reduce(&dd);
    }
    let text = match what {
        "build" => files::to_json(&DdJson {
            num_vars: dd.num_vars(),
            root: dd.root(),
            terminal: dd.terminal(),
            layers: dd.layers(),
            arcs: dd.arcs(),
        })?,
        "dot" => export_dot(&dd),
        _ => {
            let widths = dd.layer_widths();
            let w: Vec<String> = widths.iter().map(|w| w.to_string()).collect();
            format!(
                "nodes: {}\narcs: {}\npaths: {}\nmax width: {}\nwidths: {}\n",
                dd.num_nodes(),
                dd.num_arcs(),
                dd.count_paths(),
                widths.iter().max().copied().unwrap_or(0),
                w.join(" ")
            )
        }
    };
    files::emit(args.out.as_deref(), &text)?;
    Ok(Outcome::Ok)
}
