//! Blocking bilevel programs with a binary follower.
//!
//! The leader picks `x^L`, which forbids the follower from using the same
//! items (`x^F ≤ 1 − x^L`); the follower then maximizes its own objective.
//! The follower's feasible set is compiled into a decision diagram, and its
//! optimality is expressed through the diagram's network dual, which yields a
//! single-level MILP. Ties among follower optima are resolved in the leader's
//! favour (optimistic semantics), both in the MILP and in the brute-force
//! oracle.

mod brute;
mod follower;
mod generator;
mod reformulation;

pub use brute::{brute_force_bilevel, DEFAULT_BRUTE_CAP};
pub use follower::{
    blocked_diagram, build_follower_dd, build_follower_lp, compute_big_m, prepare_follower, BigMRule,
};
pub use generator::{generate_cpsp, CoeffDist, CpspOptions, PenaltyRule};
pub use reformulation::{
    build_single_level_milp, certify, check_certificate, solve_ddr, solve_ddr_with, Certificate, DdrOptions,
};

use crate::dd::DecisionDiagram;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Follower {
    /// `max c^F x` subject to `rows · x ≤ rhs`, `x` binary.
    Knapsack { rows: Vec<Vec<i64>>, rhs: Vec<i64>, objective: Vec<f64> },
    /// A prebuilt diagram over binary values whose arc lengths are the
    /// follower's objective contributions.
    Diagram(DecisionDiagram),
}

/// `max c1·x^L + c2·x^F` s.t. `A^L x^L + B^L x^F ≤ b^L` and `x^F` optimal for
/// the follower under blocking.
#[derive(Debug, Clone, PartialEq)]
pub struct BilevelInstance {
    pub n: usize,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub leader_a: Vec<Vec<f64>>,
    pub leader_b: Vec<Vec<f64>>,
    pub leader_rhs: Vec<f64>,
    pub follower: Follower,
}

impl BilevelInstance {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let bad = |m: &str| Err(Error::InvalidInstance(m.to_string()));
        if n == 0 || self.c1.len() != n || self.c2.len() != n {
            return bad("objective vectors must have length n >= 1");
        }
        let m = self.leader_rhs.len();
        if self.leader_a.len() != m || self.leader_b.len() != m {
            return bad("leader row count mismatch");
        }
        if self.leader_a.iter().chain(&self.leader_b).any(|r| r.len() != n) {
            return bad("leader row length mismatch");
        }
        match &self.follower {
            Follower::Knapsack { rows, rhs, objective } => {
                if rows.len() != rhs.len() || rows.iter().any(|r| r.len() != n) || objective.len() != n {
                    return bad("follower data has the wrong shape");
                }
            }
            Follower::Diagram(dd) => {
                if dd.num_vars() != n || dd.arcs().iter().any(|a| a.value != 0 && a.value != 1) {
                    return bad("follower diagram must be binary over n variables");
                }
            }
        }
        Ok(())
    }

    /// Leader rows hold for the pair.
    pub fn leader_feasible(&self, xl: &[u8], xf: &[u8]) -> bool {
        self.leader_rhs.iter().enumerate().all(|(i, &b)| {
            let lhs: f64 = (0..self.n)
                .map(|j| self.leader_a[i][j] * xl[j] as f64 + self.leader_b[i][j] * xf[j] as f64)
                .sum();
            lhs <= b + 1e-9
        })
    }

    pub fn leader_value(&self, xl: &[u8], xf: &[u8]) -> f64 {
        (0..self.n).map(|j| self.c1[j] * xl[j] as f64 + self.c2[j] * xf[j] as f64).sum()
    }

    /// Checks a claimed solution: shapes, blocking, leader rows, that the
    /// follower response is feasible and optimal under the blocking, and
    /// the reported objectives.
    pub fn verify(&self, sol: &BilevelSolution) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        let (xl, xf) = (&sol.x_leader, &sol.x_follower);
        if xl.len() != self.n || xf.len() != self.n || xl.iter().chain(xf).any(|&v| v > 1) {
            return bad("solution vectors must be binary of length n".into());
        }
        if (0..self.n).any(|j| xl[j] + xf[j] > 1) {
            return bad("the follower uses a blocked item".into());
        }
        if !self.leader_feasible(xl, xf) {
            return bad("leader rows are violated".into());
        }
        let blocked = blocked_diagram(&build_follower_dd(self)?, xl)?;
        let mut u = blocked.root();
        let mut value = 0.0;
        while u != blocked.terminal() {
            let want = xf[blocked.node_layer(u)] as i64;
            let Some(&a) = blocked.out_arcs(u).iter().find(|&&a| blocked.arc(a).value == want) else {
                return bad("the follower response is infeasible".into());
            };
            value += blocked.arc(a).length;
            u = blocked.arc(a).head;
        }
        let best = crate::dd::extreme_path(&blocked, crate::Sense::Max).objective;
        let tol = 1e-6 * best.abs().max(1.0);
        if (best - value).abs() > tol {
            return bad(format!("the follower response earns {value}, its optimum is {best}"));
        }
        if (sol.follower_objective - value).abs() > tol {
            return bad(format!("reported follower objective {} differs from {value}", sol.follower_objective));
        }
        let lv = self.leader_value(xl, xf);
        if (sol.leader_objective - lv).abs() > 1e-6 * lv.abs().max(1.0) {
            return bad(format!("reported leader objective {} differs from {lv}", sol.leader_objective));
        }
        Ok(())
    }

    /// `true` when the follower is a knapsack with non-negative rows.
    pub fn follower_rows_nonnegative(&self) -> bool {
        matches!(&self.follower, Follower::Knapsack { rows, .. } if rows.iter().flatten().all(|&a| a >= 0))
    }
}

/// Competitive project selection: the leader earns `c^L` on its projects and
/// pays `d^L` for each project the follower runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpspInstance {
    pub n: usize,
    pub c_leader: Vec<i64>,
    pub d_leader: Vec<i64>,
    pub c_follower: Vec<i64>,
    pub a_leader: Vec<i64>,
    pub a_follower: Vec<i64>,
    pub b_leader: i64,
    pub b_follower: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<CpspMeta>,
}

/// How an instance was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpspMeta {
    pub seed: u64,
    pub tightness: f64,
    pub dist: CoeffDist,
    pub penalty: PenaltyRule,
    pub signed_follower_profit: bool,
}

impl CpspInstance {
    pub fn to_bilevel(&self) -> BilevelInstance {
        let n = self.n;
        let f = |v: &[i64]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
        BilevelInstance {
            n,
            c1: f(&self.c_leader),
            c2: self.d_leader.iter().map(|&d| -(d as f64)).collect(),
            leader_a: vec![f(&self.a_leader)],
            leader_b: vec![vec![0.0; n]],
            leader_rhs: vec![self.b_leader as f64],
            follower: Follower::Knapsack {
                rows: vec![self.a_follower.clone()],
                rhs: vec![self.b_follower],
                objective: f(&self.c_follower),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilevelSolution {
    pub x_leader: Vec<u8>,
    pub x_follower: Vec<u8>,
    pub leader_objective: f64,
    pub follower_objective: f64,
    /// Node potentials of the follower diagram (terminal fixed at 0).
    #[serde(default)]
    pub pi: Vec<f64>,
    /// Per-arc duals of the blocking rows (0 on no-arcs).
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub nodes: usize,
}
