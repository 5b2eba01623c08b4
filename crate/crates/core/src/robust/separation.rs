use super::{DeadlineSemantics, RtsptwInstance, Scenario};
use crate::milp::{LpModel, RowSense};
use crate::{Error, Result, Sense};

pub const DEFAULT_SEP_EPSILON: f64 = 1e-4;

const NONE: i64 = i64::MIN;

/// A deadline missed by a route under some scenario of `Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position in the route.
    pub position: usize,
    pub vertex: usize,
    pub scenario: Scenario,
    /// Worst-case time at `vertex`, compared against its deadline.
    pub time: i64,
}

struct Table {
    // e[k][β]: latest completion at position k using exactly β units of
    // service on positions 1..=k, NONE if unreachable
    e: Vec<Vec<i64>>,
    // choice[k][β]: service given to position k on the way to e[k][β]
    choice: Vec<Vec<i64>>,
    // budget that the positions after k must keep for their lower bounds
    tail_lower: Vec<i64>,
    travel: Vec<i64>,
    cap: i64,
}

fn table(inst: &RtsptwInstance, route: &[usize]) -> Table {
    let len = route.len();
    let cap = inst.budget.min(inst.upper.iter().sum::<i64>()).max(0);
    let width = cap as usize + 1;
    let edges = inst.edge_table();
    let nv = inst.num_vertices();
    let mut tail_lower = vec![0i64; len];
    for k in (0..len.saturating_sub(1)).rev() {
        tail_lower[k] = tail_lower[k + 1] + inst.lower[route[k + 1]];
    }
    let mut travel = vec![0i64; len];
    let mut e = vec![vec![NONE; width]; len];
    let mut choice = vec![vec![0i64; width]; len];
    e[0][0] = 0;
    for k in 1..len {
        let (i, j) = (route[k - 1], route[k]);
        travel[k] = edges[i * nv + j].expect("route uses a missing edge").1;
        for b0 in 0..width {
            let prev = e[k - 1][b0];
            if prev == NONE {
                continue;
            }
            let arrival = inst.release[j].max(prev + travel[k]);
            for d in inst.lower[j]..=inst.upper[j] {
                let b = b0 + d as usize;
                if b >= width {
                    break;
                }
                if arrival + d > e[k][b] {
                    e[k][b] = arrival + d;
                    choice[k][b] = d;
                }
            }
        }
    }
    Table { e, choice, tail_lower, travel, cap }
}

impl Table {
    /// Worst checked time at position `k` and the budget state behind it:
    /// `(time, β, own)` where `β` is spent on positions `< k` (arrival) or
    /// `≤ k` (completion).
    fn worst(&self, inst: &RtsptwInstance, route: &[usize], k: usize) -> (i64, usize, i64) {
        let j = route[k];
        let mut best = (NONE, 0, 0);
        match inst.semantics {
            DeadlineSemantics::Arrival => {
                let limit = inst.budget - inst.lower[j] - self.tail_lower[k];
                for b in 0..=(self.cap.min(limit).max(-1)) {
                    let prev = self.e[k - 1][b as usize];
                    if prev != NONE {
                        let t = inst.release[j].max(prev + self.travel[k]);
                        if t > best.0 {
                            best = (t, b as usize, inst.lower[j]);
                        }
                    }
                }
            }
            DeadlineSemantics::Completion => {
                let limit = inst.budget - self.tail_lower[k];
                for b in 0..=(self.cap.min(limit).max(-1)) {
                    let t = self.e[k][b as usize];
                    if t > best.0 {
                        best = (t, b as usize, self.choice[k][b as usize]);
                    }
                }
            }
        }
        best
    }
}

/// Worst-case checked time (arrival or completion, per the instance) at
/// every route position over all of `Δ`; position 0 reports 0.
pub fn worst_case_times(inst: &RtsptwInstance, route: &[usize]) -> Vec<i64> {
    let tab = table(inst, route);
    let mut out = vec![0; route.len()];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = tab.worst(inst, route, k).0;
    }
    out
}

/// Exact separation by dynamic programming over (position, budget used).
///
/// Returns the first position whose worst-case time misses its deadline,
/// with a scenario of `Δ` that attains it: the prefix takes the
/// maximizing service times and every other vertex its lower bound.
pub fn separate(inst: &RtsptwInstance, route: &[usize]) -> Option<Violation> {
    let tab = table(inst, route);
    for k in 1..route.len() {
        let j = route[k];
        let (time, b, own) = tab.worst(inst, route, k);
        if time == NONE || time <= inst.deadline[j] {
            continue;
        }
        let mut delta = inst.lower.clone();
        delta[j] = own;
        let (mut kk, mut bb) = match inst.semantics {
            DeadlineSemantics::Arrival => (k - 1, b),
            DeadlineSemantics::Completion => (k - 1, b - own as usize),
        };
        while kk > 0 {
            let d = tab.choice[kk][bb];
            delta[route[kk]] = d;
            bb -= d as usize;
            kk -= 1;
        }
        return Some(Violation { position: k, vertex: j, scenario: Scenario { delta }, time });
    }
    None
}

/// Every scenario of `Δ`, in lexicographic order of `δ`. Fails when there
/// are more than `cap` of them.
pub fn enumerate_scenarios(inst: &RtsptwInstance, cap: Option<usize>) -> Result<Vec<Scenario>> {
    let cap = cap.unwrap_or(1_000_000);
    let nv = inst.num_vertices();
    let mut out = Vec::new();
    let mut delta = inst.lower.clone();
    let spare = inst.budget - delta.iter().sum::<i64>();
    if spare < 0 {
        return Ok(out);
    }
    fn rec(
        inst: &RtsptwInstance,
        j: usize,
        nv: usize,
        spare: i64,
        delta: &mut Vec<i64>,
        out: &mut Vec<Scenario>,
        cap: usize,
    ) -> Result<()> {
        if j == nv {
            if out.len() == cap {
                return Err(Error::CapExceeded(format!("more than {cap} scenarios")));
            }
            out.push(Scenario { delta: delta.clone() });
            return Ok(());
        }
        let l = inst.lower[j];
        for d in l..=inst.upper[j].min(l + spare) {
            delta[j] = d;
            rec(inst, j + 1, nv, spare - (d - l), delta, out, cap)?;
        }
        delta[j] = l;
        Ok(())
    }
    rec(inst, 0, nv, spare, &mut delta, &mut out, cap)?;
    Ok(out)
}

/// Separation MILP counting the deadlines a scenario can break on a fixed
/// route, with the `max` in the arrival recursion linearized by one binary
/// per position.
#[derive(Debug, Clone)]
pub struct SepModel {
    pub model: LpModel,
    // per vertex: (variable, weight) of the binary expansion of δ_j − l_j
    bits: Vec<Vec<(usize, i64)>>,
    lower: Vec<i64>,
}

impl SepModel {
    /// Scenario encoded by a solution of the model.
    pub fn scenario(&self, x: &[f64]) -> Scenario {
        let delta = self
            .bits
            .iter()
            .zip(&self.lower)
            .map(|(bits, &l)| l + bits.iter().map(|&(v, w)| if x[v] > 0.5 { w } else { 0 }).sum::<i64>())
            .collect();
        Scenario { delta }
    }
}

/// `max Σ v_k` subject to `w_0 = 0`, `w_k = max(r_k, w_{k−1} + δ_{k−1} + t)`,
/// `w_k ≥ (d_k + ε) v_k` and `δ ∈ Δ`.
pub fn build_sep_milp(inst: &RtsptwInstance, route: &[usize], epsilon: f64) -> SepModel {
    let nv = inst.num_vertices();
    let edges = inst.edge_table();
    let mut m = LpModel::new(Sense::Max);
    let mut bits: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nv];
    for j in 0..nv {
        let range = inst.upper[j] - inst.lower[j];
        let mut w = 1;
        let mut k = 0;
        while range >= w {
            bits[j].push((m.add_binary(format!("z_{j}_{k}")), w));
            w *= 2;
            k += 1;
        }
        let total: i64 = bits[j].iter().map(|b| b.1).sum();
        if total > range {
            let terms = bits[j].iter().map(|&(v, w)| (v, w as f64)).collect();
            m.add_constraint(format!("service_{j}"), terms, RowSense::Le, range as f64);
        }
    }
    let spare = inst.budget - inst.lower.iter().sum::<i64>();
    let terms: Vec<(usize, f64)> = bits.iter().flatten().map(|&(v, w)| (v, w as f64)).collect();
    if !terms.is_empty() {
        m.add_constraint("budget", terms, RowSense::Le, spare as f64);
    }

    let mut horizon = inst.release.iter().skip(1).copied().max().unwrap_or(0);
    for k in 1..route.len() {
        let t = edges[route[k - 1] * nv + route[k]].expect("route uses a missing edge").1;
        horizon += t + inst.upper[route[k - 1]];
    }
    let big = (horizon + 1) as f64;
    let w: Vec<usize> = (0..route.len())
        .map(|k| m.add_var(format!("w_{}", route[k]), 0.0, if k == 0 { 0.0 } else { big }))
        .collect();
    let mut objective = Vec::new();
    for k in 1..route.len() {
        let (i, j) = (route[k - 1], route[k]);
        let t = edges[i * nv + j].unwrap().1 as f64;
        let r = inst.release[j] as f64;
        let li = inst.lower[i] as f64;
        // w_k − w_{k−1} − δ_i ≥ t  (δ_i = l_i + Σ bits)
        let mut path: Vec<(usize, f64)> = vec![(w[k], 1.0), (w[k - 1], -1.0)];
        path.extend(bits[i].iter().map(|&(v, wt)| (v, -(wt as f64))));
        m.add_constraint(format!("after_{j}"), path.clone(), RowSense::Ge, t + li);
        m.add_constraint(format!("release_{j}"), vec![(w[k], 1.0)], RowSense::Ge, r);
        let q = m.add_binary(format!("q_{j}"));
        m.add_constraint(format!("waits_{j}"), vec![(w[k], 1.0), (q, -big)], RowSense::Le, r);
        let mut tight = path;
        tight.push((q, big));
        m.add_constraint(format!("travels_{j}"), tight, RowSense::Le, t + li + big);

        let d = inst.deadline[j];
        let reach = match inst.semantics {
            DeadlineSemantics::Arrival => horizon,
            DeadlineSemantics::Completion => horizon + inst.upper[j],
        };
        if d >= reach {
            continue;
        }
        let v = m.add_binary(format!("v_{j}"));
        let mut late = vec![(w[k], 1.0), (v, -(d as f64 + epsilon))];
        let mut rhs = 0.0;
        if inst.semantics == DeadlineSemantics::Completion {
            late.extend(bits[j].iter().map(|&(b, wt)| (b, wt as f64)));
            rhs = -(inst.lower[j] as f64);
        }
        m.add_constraint(format!("late_{j}"), late, RowSense::Ge, rhs);
        objective.push((v, 1.0));
    }
    m.set_objective(objective);
    SepModel { model: m, bits, lower: inst.lower.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::solve_milp;
    use crate::robust::fixtures::{chain, complete, two_routes};
    use crate::robust::{check_route, generate_rtsptw, DeadlineSemantics};
    use proptest::prelude::*;

    fn exhaustive_worst(inst: &RtsptwInstance, route: &[usize]) -> Vec<i64> {
        let mut worst = vec![i64::MIN; route.len()];
        worst[0] = 0;
        for s in enumerate_scenarios(inst, None).unwrap() {
            let c = check_route(inst, route, &s);
            for k in 1..route.len() {
                let t = inst.checked_time(c.arrival[k], s.delta[route[k]]);
                worst[k] = worst[k].max(t);
            }
        }
        worst
    }

    #[test]
    fn chain_violation() {
        let inst = chain();
        let v = separate(&inst, &[0, 1, 2]).unwrap();
        assert_eq!(v.vertex, 2);
        assert_eq!(v.scenario.delta, vec![0, 2, 0]);
        assert_eq!(v.time, 4);
        let mut ok = chain();
        ok.budget = 1;
        assert_eq!(separate(&ok, &[0, 1, 2]), None);
    }

    #[test]
    fn zero_budget_is_nominal_check() {
        let mut inst = two_routes();
        inst.budget = 0;
        for r in [[0, 1, 2, 3], [0, 2, 1, 3]] {
            let nominal = check_route(&inst, &r, &inst.nominal()).feasible();
            assert_eq!(separate(&inst, &r).is_none(), nominal);
        }
    }

    #[test]
    fn scenario_enumeration() {
        let inst = two_routes();
        let all = enumerate_scenarios(&inst, None).unwrap();
        // δ_1 + δ_2 ≤ 2 with both in 0..=2
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|s| inst.contains(s)));
        assert!(enumerate_scenarios(&inst, Some(5)).is_err());
    }

    #[test]
    fn sep_milp_counts_violations() {
        let inst = chain();
        let sep = build_sep_milp(&inst, &[0, 1, 2], DEFAULT_SEP_EPSILON);
        let s = solve_milp(&sep.model).unwrap();
        assert_eq!(s.objective.round(), 1.0);
        let d = sep.scenario(&s.x);
        assert!(inst.contains(&d));
        assert!(!check_route(&inst, &[0, 1, 2], &d).feasible());

        let mut ok = chain();
        ok.budget = 1;
        let sep = build_sep_milp(&ok, &[0, 1, 2], DEFAULT_SEP_EPSILON);
        assert_eq!(solve_milp(&sep.model).unwrap().objective.round(), 0.0);
    }

    #[test]
    fn sep_milp_two_independent_deadlines() {
        // 0 → 1 → 2 → 3 → 4, unit travel; a delay at 1 hurts 2, a delay at
        // 3 hurts 4, and the budget covers both
        let mut inst = complete(4, |_, _| 1);
        inst.release = vec![0, 0, 10, 10, 0];
        inst.deadline = vec![0, 100, 10, 100, 11];
        inst.upper = vec![0, 9, 0, 2, 0];
        inst.budget = 11;
        let r = [0, 1, 2, 3, 4];
        let sep = build_sep_milp(&inst, &r, DEFAULT_SEP_EPSILON);
        let s = solve_milp(&sep.model).unwrap();
        assert_eq!(s.objective.round(), 2.0);
        let d = sep.scenario(&s.x);
        let c = check_route(&inst, &r, &d);
        let late = (1..5).filter(|&k| c.arrival[k] > inst.deadline[r[k]]).count();
        assert_eq!(late, 2);
        let best = enumerate_scenarios(&inst, None)
            .unwrap()
            .iter()
            .map(|s| {
                let c = check_route(&inst, &r, s);
                (1..5).filter(|&k| c.arrival[k] > inst.deadline[r[k]]).count()
            })
            .max()
            .unwrap();
        assert_eq!(best, 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn dp_matches_enumeration(seed in 0u64..10_000, n in 3usize..7, b in 0i64..6, completion in any::<bool>()) {
            let mut inst = generate_rtsptw(n, 10, b, seed);
            inst.upper = inst.upper.iter().enumerate().map(|(j, &u)| if j == 0 || j == n { 0 } else { u + (seed as i64 + j as i64) % 2 }).collect();
            inst.lower = (0..=n).map(|j| if j % 3 == 1 && j < n && b > 2 { 1 } else { 0 }).collect();
            prop_assume!(inst.validate().is_ok());
            if completion {
                inst.semantics = DeadlineSemantics::Completion;
            }
            let tour = inst.meta.as_ref().unwrap().seed_tour.clone();
            let mut route = tour.clone();
            route[1..n].reverse();
            for r in [tour, route] {
                if inst.validate_route(&r).is_err() {
                    continue;
                }
                let dp = worst_case_times(&inst, &r);
                prop_assert_eq!(&dp, &exhaustive_worst(&inst, &r));
                let any_late = enumerate_scenarios(&inst, None).unwrap().iter().any(|s| !check_route(&inst, &r, s).feasible());
                let v = separate(&inst, &r);
                prop_assert_eq!(v.is_some(), any_late);
                if let Some(v) = v {
                    prop_assert!(inst.contains(&v.scenario));
                    let c = check_route(&inst, &r, &v.scenario);
                    prop_assert_eq!(c.violation, Some(v.position));
                }
            }
        }
    }
}
