use super::{CspInstance, ResourceModel};
use crate::dd::{ArcId, DecisionDiagram, NodeId, PathSolution};
use crate::{Deadline, Error, Result, Sense};

const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct PulseConfig {
    /// Labels kept per node for dominance pruning; 0 disables it.
    pub store_size: usize,
    /// Known objective value (in the instance's sense) that a solution must
    /// strictly beat.
    pub initial_bound: Option<f64>,
    pub deadline: Deadline,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig { store_size: 4, initial_bound: None, deadline: Deadline::none() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PulseStats {
    pub visits: usize,
    pub pruned_infeasible: usize,
    pub pruned_bound: usize,
    pub pruned_dominance: usize,
    pub pruned_extension: usize,
}

pub fn solve_pulse(csp: &CspInstance, config: &PulseConfig) -> Result<PathSolution> {
    solve_pulse_with(csp.dd, &csp.resources(), csp.sense, config).map(|r| r.0)
}

/// Depth-first search from the root that abandons a partial path when it
/// cannot stay feasible, cannot beat the incumbent, or is dominated by a
/// label already stored at its node.
pub fn solve_pulse_with<R: ResourceModel>(
    dd: &DecisionDiagram,
    model: &R,
    sense: Sense,
    config: &PulseConfig,
) -> Result<(PathSolution, PulseStats)> {
    let sign = sense.sign();
    let mut bound = vec![f64::INFINITY; dd.num_nodes()];
    bound[dd.terminal()] = 0.0;
    for layer in dd.layers().iter().rev().skip(1) {
        for &u in layer {
            for &a in dd.out_arcs(u) {
                let arc = dd.arc(a);
                bound[u] = bound[u].min(sign * arc.length + bound[arc.head]);
            }
        }
    }
    // Children are tried best-completion first, ties by arc id.
    let order: Vec<Vec<ArcId>> = (0..dd.num_nodes())
        .map(|u| {
            let mut out = dd.out_arcs(u).to_vec();
            let key = |&a: &ArcId| sign * dd.arc(a).length + bound[dd.arc(a).head];
            out.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
            out
        })
        .collect();

    let mut search = Pulse {
        dd,
        model,
        sign,
        bound,
        order,
        store: vec![Vec::new(); dd.num_nodes()],
        next_slot: vec![0; dd.num_nodes()],
        store_size: config.store_size,
        incumbent: config.initial_bound.map_or(f64::INFINITY, |b| sign * b),
        best: None,
        path: Vec::with_capacity(dd.num_vars()),
        stats: PulseStats::default(),
        deadline: config.deadline,
    };
    search.pulse(dd.root(), model.root(), 0.0)?;
    let stats = search.stats;
    let arcs = search.best.ok_or(Error::NoFeasiblePath)?;
    Ok((PathSolution::from_arcs(dd, arcs), stats))
}

struct Pulse<'a, R: ResourceModel> {
    dd: &'a DecisionDiagram,
    model: &'a R,
    sign: f64,
    bound: Vec<f64>,
    order: Vec<Vec<ArcId>>,
    store: Vec<Vec<(R::Label, f64)>>,
    next_slot: Vec<usize>,
    store_size: usize,
    incumbent: f64,
    best: Option<Vec<ArcId>>,
    path: Vec<ArcId>,
    stats: PulseStats,
    deadline: Deadline,
}

impl<R: ResourceModel> Pulse<'_, R> {
    fn pulse(&mut self, u: NodeId, label: R::Label, cost: f64) -> Result<()> {
        self.stats.visits += 1;
        if self.stats.visits % 4096 == 0 {
            self.deadline.check()?;
        }
        if u == self.dd.terminal() {
            if cost < self.incumbent - COST_TOL {
                self.incumbent = cost;
                self.best = Some(self.path.clone());
            }
            return Ok(());
        }
        if cost + self.bound[u] >= self.incumbent - COST_TOL {
            self.stats.pruned_bound += 1;
            return Ok(());
        }
        if !self.model.can_complete(&label, u) {
            self.stats.pruned_infeasible += 1;
            return Ok(());
        }
        if self.store_size > 0 {
            let dominated = self.store[u]
                .iter()
                .any(|(l, c)| *c <= cost + COST_TOL && self.model.dominates(l, &label));
            if dominated {
                self.stats.pruned_dominance += 1;
                return Ok(());
            }
            if self.store[u].len() < self.store_size {
                self.store[u].push((label.clone(), cost));
            } else {
                let slot = self.next_slot[u];
                self.store[u][slot] = (label.clone(), cost);
                self.next_slot[u] = (slot + 1) % self.store_size;
            }
        }
        for k in 0..self.order[u].len() {
            let a = self.order[u][k];
            let arc = self.dd.arc(a);
            let Some(next) = self.model.extend(&label, arc) else {
                self.stats.pruned_extension += 1;
                continue;
            };
            self.path.push(a);
            self.pulse(arc.head, next, cost + self.sign * arc.length)?;
            self.path.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::fixtures::{example2_dd, example2_side};
    use crate::csp::{brute_force_csp, SideConstraints};
    use crate::dd::{enumerate_paths, extreme_path};

    #[test]
    fn example2_optimum() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        for store_size in [0, 1, 4, 16] {
            let cfg = PulseConfig { store_size, ..Default::default() };
            let sol = solve_pulse(&csp, &cfg).unwrap();
            assert_eq!((sol.objective, sol.values.clone()), (8.0, vec![0, 0, 0, 1]));
        }
    }

    #[test]
    fn no_rows_is_extreme_path() {
        let dd = example2_dd();
        let csp = CspInstance::unconstrained(&dd, Sense::Max);
        let sol = solve_pulse(&csp, &PulseConfig::default()).unwrap();
        assert_eq!(sol, extreme_path(&dd, Sense::Max));
    }

    #[test]
    fn only_zero_path_feasible_and_visits_are_bounded() {
        let dd = example2_dd();
        let side = SideConstraints::single_row(&dd, 0.0, |a| dd.arc(a).value as f64).unwrap();
        let csp = CspInstance::new(&dd, side, Sense::Max).unwrap();
        let cfg = PulseConfig::default();
        let (sol, stats) = solve_pulse_with(&dd, &csp.resources(), Sense::Max, &cfg).unwrap();
        assert_eq!(sol.values, vec![0, 0, 0, 0]);
        assert_eq!(sol, brute_force_csp(&csp).unwrap());
        let paths = enumerate_paths(&dd, None).unwrap().count();
        let pruned = stats.pruned_bound + stats.pruned_infeasible + stats.pruned_dominance;
        assert!(stats.visits <= dd.num_nodes() * cfg.store_size + pruned + paths);
    }

    #[test]
    fn initial_bound_can_leave_nothing() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        let cfg = PulseConfig { initial_bound: Some(8.0), ..Default::default() };
        assert_eq!(solve_pulse(&csp, &cfg), Err(Error::NoFeasiblePath));
    }
}
