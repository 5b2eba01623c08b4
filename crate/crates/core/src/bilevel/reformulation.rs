use super::follower::{add_flow_rows, blocked_diagram, build_follower_dd, compute_big_m, prepare_follower, BigMRule};
use super::{BilevelInstance, BilevelSolution};
use crate::dd::{extreme_path, DecisionDiagram};
use crate::milp::{solve_milp_with, LpModel, RowSense, SolverOptions};
use crate::{Error, Result, Sense};

/// Single-level MILP: leader rows, the follower's flow over `dd`, its network
/// dual, and the strong-duality row linearized with `big_m`.
///
/// Variable names: `xl[j]`, `xf[j]`, `y[a]`, `pi[u]` (terminal omitted, fixed
/// at 0) and `g[a]` for yes-arcs.
pub fn build_single_level_milp(inst: &BilevelInstance, dd: &DecisionDiagram, big_m: &[f64]) -> LpModel {
    let n = inst.n;
    let mut m = LpModel::new(Sense::Max);
    let xl: Vec<usize> = (0..n).map(|j| m.add_binary(format!("xl[{j}]"))).collect();
    // with x^L fixed the follower part is integral, so branch there first
    for &j in &xl {
        m.set_priority(j, 1);
    }
    let xf: Vec<usize> = (0..n).map(|j| m.add_binary(format!("xf[{j}]"))).collect();
    let y: Vec<usize> = (0..dd.num_arcs()).map(|a| m.add_var(format!("y[{a}]"), 0.0, 1.0)).collect();
    let t = dd.terminal();
    let pi: Vec<Option<usize>> = (0..dd.num_nodes())
        .map(|u| (u != t).then(|| m.add_var(format!("pi[{u}]"), f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let yes: Vec<&crate::dd::Arc> = dd.arcs().iter().filter(|a| a.value == 1).collect();
    let mut g = vec![usize::MAX; dd.num_arcs()];
    for a in &yes {
        g[a.id] = m.add_var(format!("g[{}]", a.id), 0.0, f64::INFINITY);
    }

    for i in 0..inst.leader_rhs.len() {
        let terms = (0..n)
            .map(|j| (xl[j], inst.leader_a[i][j]))
            .chain((0..n).map(|j| (xf[j], inst.leader_b[i][j])))
            .collect();
        m.add_constraint(format!("leader[{i}]"), terms, RowSense::Le, inst.leader_rhs[i]);
    }
    add_flow_rows(&mut m, dd, &y);
    for a in &yes {
        let j = dd.arc_layer(a.id);
        m.add_constraint(format!("block[{}]", a.id), vec![(y[a.id], 1.0), (xl[j], 1.0)], RowSense::Le, 1.0);
    }
    for a in dd.arcs() {
        let mut terms = Vec::with_capacity(3);
        terms.extend(pi[a.tail].map(|p| (p, 1.0)));
        terms.extend(pi[a.head].map(|p| (p, -1.0)));
        if a.value == 1 {
            terms.push((g[a.id], 1.0));
        }
        m.add_constraint(format!("dual[{}]", a.id), terms, RowSense::Ge, a.length);
    }
    for j in 0..n {
        let mut terms = vec![(xf[j], 1.0)];
        terms.extend(yes.iter().filter(|a| dd.arc_layer(a.id) == j).map(|a| (y[a.id], -1.0)));
        m.add_constraint(format!("link[{j}]"), terms, RowSense::Eq, 0.0);
    }
    let mut sd: Vec<(usize, f64)> = dd.arcs().iter().map(|a| (y[a.id], a.length)).collect();
    sd.push((pi[dd.root()].expect("root is not the terminal"), -1.0));
    for a in &yes {
        sd.push((g[a.id], -1.0));
        sd.push((xl[dd.arc_layer(a.id)], big_m[a.id]));
    }
    m.add_constraint("strong_duality", sd, RowSense::Eq, 0.0);
    for a in &yes {
        let j = dd.arc_layer(a.id);
        m.add_constraint(
            format!("consistency[{}]", a.id),
            vec![(g[a.id], 1.0), (xl[j], -big_m[a.id])],
            RowSense::Ge,
            0.0,
        );
    }

    let obj = (0..n).map(|j| (xl[j], inst.c1[j])).chain((0..n).map(|j| (xf[j], inst.c2[j]))).collect();
    m.set_objective(obj);
    m
}

/// Residuals of the follower optimality certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Largest violation of `π_tail − π_head (+ γ_a) ≥ ℓ_a` or `γ ≥ 0`.
    pub dual_feasibility: f64,
    /// `|ℓᵀy − π_r − Σ γ_a (1 − x^L_{layer(a)})|`.
    pub strong_duality: f64,
    /// Same row in its big-M form.
    pub linearized: f64,
}

impl Certificate {
    pub fn max_residual(&self) -> f64 {
        self.dual_feasibility.max(self.strong_duality).max(self.linearized)
    }
}

/// `pi` is indexed by node (terminal = 0), `gamma` and `y` by arc.
pub fn check_certificate(
    dd: &DecisionDiagram,
    big_m: &[f64],
    x_leader: &[u8],
    y: &[f64],
    pi: &[f64],
    gamma: &[f64],
) -> Certificate {
    let mut dual = 0.0f64;
    let mut primal = 0.0;
    let mut dual_obj = pi[dd.root()] - pi[dd.terminal()];
    let mut linear = dual_obj;
    for a in dd.arcs() {
        let mut lhs = pi[a.tail] - pi[a.head];
        primal += a.length * y[a.id];
        if a.value == 1 {
            lhs += gamma[a.id];
            dual = dual.max(-gamma[a.id]);
            let blocked = x_leader[dd.arc_layer(a.id)] as f64;
            dual_obj += gamma[a.id] * (1.0 - blocked);
            linear += gamma[a.id] - big_m[a.id] * blocked;
        }
        dual = dual.max(a.length - lhs);
    }
    Certificate {
        dual_feasibility: dual.max(0.0),
        strong_duality: (primal - dual_obj).abs(),
        linearized: (primal - linear).abs(),
    }
}

/// Certificate of a solution found with big-M `rule`, rebuilt from its
/// follower response and the duals it carries.
pub fn certify(inst: &BilevelInstance, sol: &BilevelSolution, rule: BigMRule) -> Result<Certificate> {
    let (dd, rule) = prepare_follower(inst, rule)?;
    let big_m = compute_big_m(inst, &dd, rule)?;
    if sol.pi.len() != dd.num_nodes() || sol.gamma.len() != dd.num_arcs() {
        return Err(Error::InvalidModel("duals do not match the follower diagram".into()));
    }
    let mut y = vec![0.0; dd.num_arcs()];
    let mut u = dd.root();
    while u != dd.terminal() {
        let want = sol.x_follower[dd.node_layer(u)] as i64;
        let a = *dd
            .out_arcs(u)
            .iter()
            .find(|&&a| dd.arc(a).value == want)
            .ok_or_else(|| Error::InvalidModel("follower response is not a diagram path".into()))?;
        y[a] = 1.0;
        u = dd.arc(a).head;
    }
    Ok(check_certificate(&dd, &big_m, &sol.x_leader, &y, &sol.pi, &sol.gamma))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DdrOptions {
    pub big_m: BigMRule,
    pub solver: SolverOptions,
}

pub fn solve_ddr(inst: &BilevelInstance) -> Result<BilevelSolution> {
    solve_ddr_with(inst, &DdrOptions::default())
}

/// Compile, reduce, assign big-Ms, build and solve the single-level MILP,
/// then re-check that the follower's answer is optimal under the blocking.
pub fn solve_ddr_with(inst: &BilevelInstance, opts: &DdrOptions) -> Result<BilevelSolution> {
    let deadline = opts.solver.deadline;
    let (dd, rule) = prepare_follower(inst, opts.big_m)?;
    deadline.check()?;
    let big_m = compute_big_m(inst, &dd, rule)?;
    let model = build_single_level_milp(inst, &dd, &big_m);
    deadline.check()?;
    let sol = solve_milp_with(&model, &opts.solver)?.into_result()?;
    let n = inst.n;
    let x_leader: Vec<u8> = (0..n).map(|j| (sol.x[j] > 0.5) as u8).collect();
    let col = |name: String| model.var(&name).map_or(0.0, |v| sol.x[v]);
    let y: Vec<f64> = (0..dd.num_arcs()).map(|a| col(format!("y[{a}]"))).collect();
    let pi: Vec<f64> = (0..dd.num_nodes()).map(|u| col(format!("pi[{u}]"))).collect();
    let gamma: Vec<f64> = (0..dd.num_arcs()).map(|a| col(format!("g[{a}]"))).collect();

    // the flow is integral, so it traces a single path
    let mut x_follower = vec![0u8; n];
    let mut follower_objective = 0.0;
    let mut u = dd.root();
    while u != dd.terminal() {
        let a = *dd
            .out_arcs(u)
            .iter()
            .find(|&&a| y[a] > 0.5)
            .ok_or_else(|| Error::InvalidModel("follower flow is not a path".into()))?;
        let arc = dd.arc(a);
        x_follower[dd.node_layer(u)] = arc.value as u8;
        follower_objective += arc.length;
        u = arc.head;
    }
    if (0..n).any(|j| (sol.x[n + j] > 0.5) as u8 != x_follower[j] || x_follower[j] + x_leader[j] > 1) {
        return Err(Error::InvalidModel("follower response does not match its flow".into()));
    }
    let full = build_follower_dd(inst)?;
    let best = extreme_path(&blocked_diagram(&full, &x_leader)?, Sense::Max).objective;
    if (best - follower_objective).abs() > 1e-6 * best.abs().max(1.0) {
        return Err(Error::InvalidModel(format!(
            "follower response {follower_objective} is not optimal ({best})"
        )));
    }
    Ok(BilevelSolution {
        leader_objective: inst.leader_value(&x_leader, &x_follower),
        x_leader,
        x_follower,
        follower_objective,
        pi,
        gamma,
        nodes: sol.nodes,
    })
}
