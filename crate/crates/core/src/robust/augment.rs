use super::{
    build_ip_baseline, build_sep_milp, check_route, build_tsp_dd_with, last_vertices, route_of, separate, DeadlineSemantics,
    RtsptwInstance, Scenario, TspDdOptions, DEFAULT_SEP_EPSILON,
};
use crate::csp::{solve_pulse_with, PulseConfig, ResourceModel};
use crate::dd::{Arc, DecisionDiagram, NodeId};
use crate::milp::{solve_milp_with, LpStatus, SolverOptions};
use crate::{Deadline, Error, Result, Sense};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// How a violated scenario is picked for a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioStrategy {
    /// Dynamic program: the first deadline that some scenario breaks.
    #[default]
    FirstViolated,
    /// Separation MILP: a scenario breaking the most deadlines.
    MostViolated,
}

#[derive(Debug, Clone, Copy)]
pub struct AugmentOptions {
    pub strategy: ScenarioStrategy,
    pub store_size: usize,
    pub dd: TspDdOptions,
    pub max_iterations: usize,
    pub deadline: Deadline,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            strategy: ScenarioStrategy::FirstViolated,
            store_size: 4,
            dd: TspDdOptions::default(),
            max_iterations: 10_000,
            deadline: Deadline::none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cost of the route found against the scenarios active so far.
    pub objective: i64,
    pub scenarios: usize,
    /// Pulse calls, or branch-and-bound nodes for the IP variant.
    pub labels: usize,
    pub time_ms: f64,
    pub route: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub route: Vec<usize>,
    pub cost: i64,
    pub scenarios: Vec<Scenario>,
    pub log: Vec<IterationRecord>,
}

/// Completion times of a partial route under each active scenario.
pub struct ArrivalProfile<'a> {
    inst: &'a RtsptwInstance,
    scenarios: &'a [Scenario],
    travel: Vec<Option<(i64, i64)>>,
    last: Vec<usize>,
    // latest completion at a node from which the rest can still be done
    // with δ = l
    latest: Vec<i64>,
}

impl<'a> ArrivalProfile<'a> {
    pub fn new(inst: &'a RtsptwInstance, dd: &DecisionDiagram, scenarios: &'a [Scenario]) -> Self {
        let travel = inst.edge_table();
        let last = last_vertices(dd);
        let nv = inst.num_vertices();
        let mut latest = vec![i64::MIN; dd.num_nodes()];
        latest[dd.terminal()] = i64::MAX;
        for layer in dd.layers().iter().rev().skip(1) {
            for &u in layer {
                for &a in dd.out_arcs(u) {
                    let arc = dd.arc(a);
                    let j = arc.value as usize;
                    let t = travel[last[u] * nv + j].expect("diagram arc without an edge").1;
                    let l = inst.lower[j];
                    let own = match inst.semantics {
                        DeadlineSemantics::Arrival => inst.deadline[j],
                        DeadlineSemantics::Completion => inst.deadline[j] - l,
                    };
                    let next = latest[arc.head];
                    if next == i64::MIN {
                        continue;
                    }
                    let cap = own.min(next.saturating_sub(l));
                    if inst.release[j] > cap {
                        continue;
                    }
                    latest[u] = latest[u].max(cap.saturating_sub(t));
                }
            }
        }
        ArrivalProfile { inst, scenarios, travel, last, latest }
    }
}

impl ResourceModel for ArrivalProfile<'_> {
    type Label = Vec<i64>;

    fn root(&self) -> Vec<i64> {
        vec![0; self.scenarios.len()]
    }

    fn extend(&self, label: &Vec<i64>, arc: &Arc) -> Option<Vec<i64>> {
        let nv = self.inst.num_vertices();
        let j = arc.value as usize;
        let t = self.travel[self.last[arc.tail] * nv + j]?.1;
        let (r, d) = (self.inst.release[j], self.inst.deadline[j]);
        let mut out = Vec::with_capacity(label.len());
        for (e, s) in label.iter().zip(self.scenarios) {
            let arrival = r.max(e + t);
            if self.inst.checked_time(arrival, s.delta[j]) > d {
                return None;
            }
            out.push(arrival + s.delta[j]);
        }
        Some(out)
    }

    fn can_complete(&self, label: &Vec<i64>, node: NodeId) -> bool {
        label.iter().all(|&e| e <= self.latest[node])
    }

    fn dominates(&self, a: &Vec<i64>, b: &Vec<i64>) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }
}

pub fn solve_state_augmenting(inst: &RtsptwInstance) -> Result<RobustSolution> {
    solve_state_augmenting_with(inst, &AugmentOptions::default())
}

/// Scenario-augmenting search over the TSP diagram.
///
/// Starts with no scenarios. Each round finds a cheapest route whose
/// completion times meet the deadlines under every active scenario (pulse
/// search with one time per scenario as resources), then asks the
/// separation oracle for a scenario that breaks it. Stops when there is none.
pub fn solve_state_augmenting_with(inst: &RtsptwInstance, opts: &AugmentOptions) -> Result<RobustSolution> {
    let dd = build_tsp_dd_with(inst, &TspDdOptions { deadline: opts.deadline, ..opts.dd })?;
    let pulse = PulseConfig { store_size: opts.store_size, initial_bound: None, deadline: opts.deadline };
    let mut active: Vec<Scenario> = Vec::new();
    let mut log = Vec::new();
    loop {
        if log.len() >= opts.max_iterations {
            return Err(Error::CapExceeded(format!("{} augmenting rounds", opts.max_iterations)));
        }
        let start = Instant::now();
        let profile = ArrivalProfile::new(inst, &dd, &active);
        let (path, stats) = solve_pulse_with(&dd, &profile, Sense::Min, &pulse)?;
        let route = route_of(&path.values);
        log.push(IterationRecord {
            iteration: log.len() + 1,
            objective: path.objective.round() as i64,
            scenarios: active.len(),
            labels: stats.visits,
            time_ms: 0.0,
            route: route.clone(),
        });
        let found = find_scenario(inst, &route, opts)?;
        log.last_mut().unwrap().time_ms = start.elapsed().as_secs_f64() * 1e3;
        match found {
            None => {
                let cost = inst.route_cost(&route);
                return Ok(RobustSolution { route, cost, scenarios: active, log });
            }
            Some(s) => add_scenario(&mut active, s)?,
        }
    }
}

/// The same loop with the arc-flow MILP as the master problem. It starts
/// from `{l}` because the model without time rows admits subtours.
pub fn solve_ip_augmenting(inst: &RtsptwInstance, opts: &AugmentOptions) -> Result<RobustSolution> {
    inst.validate()?;
    let solver = SolverOptions { deadline: opts.deadline, ..SolverOptions::default() };
    let mut active = vec![inst.nominal()];
    let mut log = Vec::new();
    loop {
        if log.len() >= opts.max_iterations {
            return Err(Error::CapExceeded(format!("{} augmenting rounds", opts.max_iterations)));
        }
        let start = Instant::now();
        let model = build_ip_baseline(inst, &active);
        let sol = solve_milp_with(&model, &solver)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::NoFeasiblePath),
            LpStatus::CapExceeded => return Err(Error::NodeCapExceeded { cap: solver.max_nodes }),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        }
        let route = ip_route(inst, &sol.x)?;
        log.push(IterationRecord {
            iteration: log.len() + 1,
            objective: sol.objective.round() as i64,
            scenarios: active.len(),
            labels: sol.nodes,
            time_ms: 0.0,
            route: route.clone(),
        });
        let found = find_scenario(inst, &route, opts)?;
        log.last_mut().unwrap().time_ms = start.elapsed().as_secs_f64() * 1e3;
        match found {
            None => {
                let cost = inst.route_cost(&route);
                return Ok(RobustSolution { route, cost, scenarios: active, log });
            }
            Some(s) => add_scenario(&mut active, s)?,
        }
    }
}

fn find_scenario(inst: &RtsptwInstance, route: &[usize], opts: &AugmentOptions) -> Result<Option<Scenario>> {
    match opts.strategy {
        ScenarioStrategy::FirstViolated => Ok(separate(inst, route).map(|v| v.scenario)),
        ScenarioStrategy::MostViolated => {
            let sep = build_sep_milp(inst, route, DEFAULT_SEP_EPSILON);
            let solver = SolverOptions { deadline: opts.deadline, ..SolverOptions::default() };
            let s = solve_milp_with(&sep.model, &solver)?.into_result()?;
            if s.objective < 0.5 {
                return Ok(None);
            }
            let found = sep.scenario(&s.x);
            // a numerically optimistic MILP answer is replaced by the exact one
            if check_route(inst, route, &found).feasible() {
                return Ok(separate(inst, route).map(|v| v.scenario));
            }
            Ok(Some(found))
        }
    }
}

fn add_scenario(active: &mut Vec<Scenario>, s: Scenario) -> Result<()> {
    if active.contains(&s) {
        return Err(Error::InvalidModel("separation returned an active scenario".into()));
    }
    active.push(s);
    Ok(())
}

fn ip_route(inst: &RtsptwInstance, x: &[f64]) -> Result<Vec<usize>> {
    let mut next = vec![usize::MAX; inst.num_vertices()];
    for (k, e) in inst.edges.iter().enumerate() {
        if x[k] > 0.5 {
            next[e.from] = e.to;
        }
    }
    let mut route = vec![0];
    while *route.last().unwrap() != inst.n && route.len() <= inst.num_vertices() {
        let v = next[*route.last().unwrap()];
        if v == usize::MAX {
            break;
        }
        route.push(v);
    }
    inst.validate_route(&route)?;
    Ok(route)
}
