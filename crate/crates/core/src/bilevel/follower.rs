use super::{BilevelInstance, Follower};
use crate::dd::{compile, reduce, DecisionDiagram, KnapsackSpec};
use crate::milp::{LpModel, RowSense};
use crate::{Error, Result, Sense};
use serde::{Deserialize, Serialize};

/// How the big-M constants of the linearized strong-duality row are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BigMRule {
    /// `ArcLength` when the follower is a knapsack with non-negative rows,
    /// `General` otherwise.
    #[default]
    Auto,
    /// `M_a = ℓ_a`. Needs a downward-closed follower set and non-negative
    /// lengths, which the preprocessing in [`prepare_follower`] guarantees.
    ArcLength,
    /// `M_a = ℓ_a` plus the spread between the longest and shortest
    /// conceivable path.
    General,
}

impl BigMRule {
    pub fn resolve(self, inst: &BilevelInstance) -> BigMRule {
        match self {
            BigMRule::Auto if inst.follower_rows_nonnegative() => BigMRule::ArcLength,
            BigMRule::Auto => BigMRule::General,
            r => r,
        }
    }
}

/// The follower's feasible set as an (unreduced) diagram. Yes-arcs carry the
/// follower profit of their layer, no-arcs carry 0.
pub fn build_follower_dd(inst: &BilevelInstance) -> Result<DecisionDiagram> {
    inst.validate()?;
    match &inst.follower {
        Follower::Knapsack { rows, rhs, objective } => {
            compile(&KnapsackSpec::new(rows.clone(), rhs.clone(), objective.clone()), inst.n)
        }
        Follower::Diagram(dd) => Ok(dd.clone()),
    }
}

/// Diagram handed to the reformulation, plus the resolved big-M rule.
///
/// Under `ArcLength`, projects with negative follower profit are never chosen
/// by the follower, so their yes-arcs are dropped before the diagram is
/// reduced.
pub fn prepare_follower(inst: &BilevelInstance, rule: BigMRule) -> Result<(DecisionDiagram, BigMRule)> {
    let rule = rule.resolve(inst);
    let dd = match (&inst.follower, rule) {
        (Follower::Knapsack { rows, rhs, objective }, BigMRule::ArcLength) => {
            if !inst.follower_rows_nonnegative() {
                return Err(Error::InvalidInstance(
                    "arc-length big-M needs non-negative follower rows".into(),
                ));
            }
            inst.validate()?;
            let fixed = objective.iter().map(|&c| c < 0.0).collect();
            let spec = KnapsackSpec::new(rows.clone(), rhs.clone(), objective.clone()).with_fixed_zero(fixed);
            compile(&spec, inst.n)?
        }
        (Follower::Diagram(_), BigMRule::ArcLength) => {
            return Err(Error::InvalidInstance(
                "arc-length big-M is only available for knapsack followers".into(),
            ))
        }
        _ => build_follower_dd(inst)?,
    };
    Ok((reduce(&dd), rule))
}

/// `M_a` indexed by arc id; entries of no-arcs are 0 and unused.
pub fn compute_big_m(inst: &BilevelInstance, dd: &DecisionDiagram, rule: BigMRule) -> Result<Vec<f64>> {
    let rule = rule.resolve(inst);
    let spread = match (&inst.follower, rule) {
        (_, BigMRule::ArcLength) => {
            if dd.arcs().iter().any(|a| a.value == 1 && a.length < 0.0) {
                return Err(Error::InvalidInstance("arc-length big-M needs non-negative lengths".into()));
            }
            0.0
        }
        (Follower::Knapsack { objective, .. }, _) => {
            objective.iter().map(|&c| c.max(0.0)).sum::<f64>() - objective.iter().map(|&c| c.min(0.0)).sum::<f64>()
        }
        (Follower::Diagram(_), _) => (0..dd.num_vars())
            .map(|j| {
                let lens = dd.layer(j).iter().flat_map(|&u| dd.out_arcs(u)).map(|&a| dd.arc(a).length);
                let (lo, hi) = lens.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l), hi.max(l)));
                hi - lo
            })
            .sum(),
    };
    Ok(dd.arcs().iter().map(|a| if a.value == 1 { a.length + spread } else { 0.0 }).collect())
}

/// `dd` with the yes-arcs of blocked layers removed. Fails with
/// `NoFeasiblePath` if the blocking leaves the follower without a response.
pub fn blocked_diagram(dd: &DecisionDiagram, x_leader: &[u8]) -> Result<DecisionDiagram> {
    dd.retain_arcs(|a| a.value == 0 || x_leader[dd.node_layer(a.tail)] == 0)
}

/// Follower LP over the diagram: one unit of r–t flow, yes-arcs of blocked
/// layers bounded by `1 − x^L_j`.
pub fn build_follower_lp(dd: &DecisionDiagram, x_leader: &[u8]) -> LpModel {
    let mut m = LpModel::new(Sense::Max);
    let y: Vec<usize> = (0..dd.num_arcs()).map(|a| m.add_var(format!("y[{a}]"), 0.0, f64::INFINITY)).collect();
    add_flow_rows(&mut m, dd, &y);
    for a in dd.arcs().iter().filter(|a| a.value == 1) {
        let blocked = x_leader[dd.arc_layer(a.id)] as f64;
        m.add_constraint(format!("block[{}]", a.id), vec![(y[a.id], 1.0)], RowSense::Le, 1.0 - blocked);
    }
    m.set_objective(dd.arcs().iter().map(|a| (y[a.id], a.length)).collect());
    m
}

/// Source row and flow balance at every internal node.
pub(crate) fn add_flow_rows(m: &mut LpModel, dd: &DecisionDiagram, y: &[usize]) {
    let source = dd.out_arcs(dd.root()).iter().map(|&a| (y[a], 1.0)).collect();
    m.add_constraint("source", source, RowSense::Eq, 1.0);
    for j in 1..dd.num_vars() {
        for &u in dd.layer(j) {
            let terms = dd
                .out_arcs(u)
                .iter()
                .map(|&a| (y[a], 1.0))
                .chain(dd.in_arcs(u).iter().map(|&a| (y[a], -1.0)))
                .collect();
            m.add_constraint(format!("balance[{u}]"), terms, RowSense::Eq, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilevel::fixtures::toy;
    use crate::bilevel::CpspInstance;
    use crate::dd::{enumerate_paths, extreme_path};
    use crate::milp::solve_lp;

    fn example4() -> BilevelInstance {
        CpspInstance {
            n: 3,
            c_leader: vec![1; 3],
            d_leader: vec![1; 3],
            c_follower: vec![1; 3],
            a_leader: vec![2, 2, 4],
            a_follower: vec![2, 2, 4],
            b_leader: 5,
            b_follower: 5,
            meta: None,
        }
        .to_bilevel()
    }

    #[test]
    fn example4_diagram() {
        let dd = build_follower_dd(&example4()).unwrap();
        assert_eq!(dd.count_paths(), 5);
        assert_eq!(dd.num_nodes(), 7);
        assert_eq!(dd.layer_widths(), vec![1, 2, 3, 1]);
        let mut sols: Vec<_> = enumerate_paths(&dd, None).unwrap().map(|p| p.values).collect();
        sols.sort();
        assert_eq!(sols, vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 0]]);
        // the two middle nodes with a single no-completion merge
        assert_eq!(reduce(&dd).num_nodes(), 6);
    }

    #[test]
    fn loose_and_zero_budgets() {
        let mut c = toy();
        c.n = 4;
        c.a_follower = vec![1, 2, 3, 4];
        c.c_follower = vec![1; 4];
        c.c_leader = vec![1; 4];
        c.d_leader = vec![1; 4];
        c.a_leader = vec![1; 4];
        c.b_follower = 10;
        let dd = reduce(&build_follower_dd(&c.to_bilevel()).unwrap());
        assert_eq!(dd.count_paths(), 16);
        assert!(dd.layer_widths().iter().all(|&w| w <= 11));
        c.b_follower = 0;
        let dd = reduce(&build_follower_dd(&c.to_bilevel()).unwrap());
        assert_eq!(dd.count_paths(), 1);
    }

    fn knapsack_inst(c: Vec<f64>) -> BilevelInstance {
        let n = c.len();
        BilevelInstance {
            n,
            c1: vec![0.0; n],
            c2: vec![0.0; n],
            leader_a: vec![],
            leader_b: vec![],
            leader_rhs: vec![],
            follower: Follower::Knapsack { rows: vec![vec![7, 5, 4, 1][..n].to_vec()], rhs: vec![8], objective: c },
        }
    }

    #[test]
    fn big_m_formulas() {
        let inst = knapsack_inst(vec![4.0, 3.0, 7.0, 8.0]);
        let dd = build_follower_dd(&inst).unwrap();
        let a = dd.arcs().iter().find(|a| a.value == 1 && a.length == 7.0).unwrap().id;
        assert_eq!(compute_big_m(&inst, &dd, BigMRule::General).unwrap()[a], 29.0);
        assert_eq!(compute_big_m(&inst, &dd, BigMRule::ArcLength).unwrap()[a], 7.0);
        assert_eq!(compute_big_m(&inst, &dd, BigMRule::Auto).unwrap()[a], 7.0);

        let inst = knapsack_inst(vec![-1.0, 2.0]);
        let dd = build_follower_dd(&inst).unwrap();
        let a = dd.arcs().iter().find(|a| a.value == 1 && a.length == 2.0).unwrap().id;
        assert_eq!(compute_big_m(&inst, &dd, BigMRule::General).unwrap()[a], 5.0);
        assert!(compute_big_m(&inst, &dd, BigMRule::ArcLength).is_err());
    }

    #[test]
    fn preprocessing_drops_unprofitable_projects() {
        let inst = knapsack_inst(vec![-1.0, 2.0]);
        let (dd, rule) = prepare_follower(&inst, BigMRule::Auto).unwrap();
        assert_eq!(rule, BigMRule::ArcLength);
        assert!(dd.arcs().iter().all(|a| dd.arc_layer(a.id) != 0 || a.value == 0));
        let (dd, _) = prepare_follower(&inst, BigMRule::General).unwrap();
        assert_eq!(dd.count_paths(), 3);
    }

    #[test]
    fn follower_lp_matches_blocked_longest_path() {
        let inst = knapsack_inst(vec![4.0, 3.0, 7.0, 8.0]);
        let dd = reduce(&build_follower_dd(&inst).unwrap());
        for mask in 0..16u8 {
            let xl: Vec<u8> = (0..4).map(|j| (mask >> j) & 1).collect();
            let lp = solve_lp(&build_follower_lp(&dd, &xl)).unwrap();
            let best = extreme_path(&blocked_diagram(&dd, &xl).unwrap(), Sense::Max).objective;
            assert!((lp.objective - best).abs() < 1e-9);
            assert!(lp.x.iter().all(|v| (v - v.round()).abs() < 1e-7));
        }
    }
}
