//! Robust TSP with time windows and uncertain service times.
//!
//! Vertices are `0..=n`; `0` is the start depot and `n` the end depot. A
//! route visits every vertex once, from `0` to `n`. Service times `δ` range
//! over the budgeted set `Δ = {δ integer : l ≤ δ ≤ u, Σ δ ≤ b}`; both depots
//! carry no service. A route is robust-feasible when its time windows hold
//! for every `δ ∈ Δ`.

mod augment;
mod brute;
mod generator;
mod ip;
mod separation;
mod tsp_dd;
mod view;

pub use augment::{
    solve_ip_augmenting, solve_state_augmenting, solve_state_augmenting_with, ArrivalProfile,
    AugmentOptions, IterationRecord, RobustSolution, ScenarioStrategy,
};
pub use brute::{brute_force_robust, DEFAULT_ROBUST_BRUTE_CAP};
pub use generator::generate_rtsptw;
pub use ip::build_ip_baseline;
pub use separation::{
    build_sep_milp, enumerate_scenarios, separate, worst_case_times, SepModel, Violation,
    DEFAULT_SEP_EPSILON,
};
pub use tsp_dd::{build_tsp_dd, build_tsp_dd_with, last_vertices, route_of, TspDdOptions, TspDdState};
pub use view::RobustConstraintView;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which time must meet the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlineSemantics {
    /// Arrival before service, `w_j ≤ d_j`.
    #[default]
    Arrival,
    /// End of service, `w_j + δ_j ≤ d_j`.
    Completion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cost: i64,
    pub time: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtsptwInstance {
    /// Index of the end depot; there are `n + 1` vertices.
    pub n: usize,
    pub edges: Vec<Edge>,
    pub release: Vec<i64>,
    /// `deadline[0]` is ignored: the start depot has no deadline.
    pub deadline: Vec<i64>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub budget: i64,
    #[serde(default)]
    pub semantics: DeadlineSemantics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<RtsptwMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtsptwMeta {
    pub seed: u64,
    pub width: i64,
    pub seed_tour: Vec<usize>,
    pub points: Vec<(i64, i64)>,
}

/// One service-time realization, indexed by vertex (depots are zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub delta: Vec<i64>,
}

/// Times along a route under one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteCheck {
    /// Arrival before service at every route position.
    pub arrival: Vec<i64>,
    /// End of service at every route position.
    pub completion: Vec<i64>,
    /// First route position whose deadline is missed.
    pub violation: Option<usize>,
}

impl RouteCheck {
    pub fn feasible(&self) -> bool {
        self.violation.is_none()
    }
}

impl RtsptwInstance {
    pub fn num_vertices(&self) -> usize {
        self.n + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        let nv = self.num_vertices();
        if self.n < 1 {
            return bad("need at least the two depots".into());
        }
        for (name, v) in [
            ("release", &self.release),
            ("deadline", &self.deadline),
            ("lower", &self.lower),
            ("upper", &self.upper),
        ] {
            if v.len() != nv {
                return bad(format!("{name} has {} entries, expected {nv}", v.len()));
            }
        }
        if self.release[0] != 0 {
            return bad("the start depot is released at time 0".into());
        }
        for j in 1..nv {
            if self.release[j] > self.deadline[j] {
                return bad(format!("vertex {j}: release after deadline"));
            }
        }
        for j in 0..nv {
            if self.lower[j] < 0 || self.lower[j] > self.upper[j] {
                return bad(format!("vertex {j}: service bounds must satisfy 0 ≤ l ≤ u"));
            }
        }
        for j in [0, self.n] {
            if self.upper[j] != 0 {
                return bad(format!("depot {j} cannot have service time"));
            }
        }
        if self.lower.iter().sum::<i64>() > self.budget {
            return bad("empty uncertainty set: Σ l exceeds the budget".into());
        }
        for e in &self.edges {
            if e.from >= nv || e.to >= nv || e.from == e.to {
                return bad(format!("edge ({}, {}) out of range", e.from, e.to));
            }
            if e.cost < 0 || e.time < 0 {
                return bad(format!("edge ({}, {}) has negative data", e.from, e.to));
            }
            if e.to == 0 || e.from == self.n {
                return bad(format!("edge ({}, {}) enters the start or leaves the end depot", e.from, e.to));
            }
        }
        let mut seen = vec![false; nv * nv];
        for e in &self.edges {
            if std::mem::replace(&mut seen[e.from * nv + e.to], true) {
                return bad(format!("duplicate edge ({}, {})", e.from, e.to));
            }
        }
        Ok(())
    }

    /// `(cost, time)` of every edge as a dense lookup.
    pub fn edge_table(&self) -> Vec<Option<(i64, i64)>> {
        let nv = self.num_vertices();
        let mut t = vec![None; nv * nv];
        for e in &self.edges {
            t[e.from * nv + e.to] = Some((e.cost, e.time));
        }
        t
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == i && e.to == j)
    }

    /// The deterministic scenario `δ = l`.
    pub fn nominal(&self) -> Scenario {
        Scenario { delta: self.lower.clone() }
    }

    pub fn contains(&self, s: &Scenario) -> bool {
        s.delta.len() == self.num_vertices()
            && s.delta.iter().zip(&self.lower).zip(&self.upper).all(|((d, l), u)| l <= d && d <= u)
            && s.delta.iter().sum::<i64>() <= self.budget
    }

    /// The time compared against the deadline, given arrival and service.
    pub(crate) fn checked_time(&self, arrival: i64, service: i64) -> i64 {
        match self.semantics {
            DeadlineSemantics::Arrival => arrival,
            DeadlineSemantics::Completion => arrival + service,
        }
    }

    /// Checks that `route` starts at 0, ends at `n`, visits every vertex once
    /// and uses existing edges only.
    pub fn validate_route(&self, route: &[usize]) -> Result<()> {
        let nv = self.num_vertices();
        let bad = |m: &str| Err(Error::InvalidInstance(format!("route {route:?}: {m}")));
        if route.len() != nv || route[0] != 0 || route[nv - 1] != self.n {
            return bad("must run from 0 to n through every vertex");
        }
        let mut seen = vec![false; nv];
        for &v in route {
            if v >= nv || std::mem::replace(&mut seen[v], true) {
                return bad("repeats or leaves the vertex range");
            }
        }
        if route.windows(2).any(|w| self.edge(w[0], w[1]).is_none()) {
            return bad("uses a missing edge");
        }
        Ok(())
    }

    pub fn route_cost(&self, route: &[usize]) -> i64 {
        let table = self.edge_table();
        let nv = self.num_vertices();
        route.windows(2).map(|w| table[w[0] * nv + w[1]].expect("route uses a missing edge").0).sum()
    }
}

/// Arrival and completion times of `route` under `delta`.
///
/// `arrival_k = max(r_k, e_{k−1} + t)`, `e_k = arrival_k + δ_k`, starting
/// from `e_0 = 0`. Panics if the route uses a missing edge.
pub fn check_route(inst: &RtsptwInstance, route: &[usize], delta: &Scenario) -> RouteCheck {
    let table = inst.edge_table();
    let nv = inst.num_vertices();
    let mut arrival = vec![0; route.len()];
    let mut completion = vec![0; route.len()];
    let mut violation = None;
    for k in 1..route.len() {
        let (i, j) = (route[k - 1], route[k]);
        let (_, t) = table[i * nv + j].expect("route uses a missing edge");
        arrival[k] = inst.release[j].max(completion[k - 1] + t);
        completion[k] = arrival[k] + delta.delta[j];
        if violation.is_none() && inst.checked_time(arrival[k], delta.delta[j]) > inst.deadline[j] {
            violation = Some(k);
        }
    }
    RouteCheck { arrival, completion, violation }
}
