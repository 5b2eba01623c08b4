use super::augment::RobustSolution;
use super::{build_tsp_dd_with, route_of, separate, RtsptwInstance, TspDdOptions};
use crate::dd::enumerate_paths;
use crate::{Error, Result};

pub const DEFAULT_ROBUST_BRUTE_CAP: usize = 10;

/// Cheapest robust-feasible route by checking every Hamiltonian path of the
/// unpruned diagram with the exact separation oracle. Ties go to the first
/// path in diagram order.
pub fn brute_force_robust(inst: &RtsptwInstance) -> Result<RobustSolution> {
    if inst.n > DEFAULT_ROBUST_BRUTE_CAP {
        return Err(Error::CapExceeded(format!(
            "brute force is limited to n ≤ {DEFAULT_ROBUST_BRUTE_CAP}"
        )));
    }
    let opts = TspDdOptions { prune: false, ..Default::default() };
    let dd = build_tsp_dd_with(inst, &opts)?;
    let mut best: Option<(i64, Vec<usize>)> = None;
    for p in enumerate_paths(&dd, None)? {
        let route = route_of(&p.values);
        let cost = inst.route_cost(&route);
        if best.as_ref().is_some_and(|b| b.0 <= cost) {
            continue;
        }
        if separate(inst, &route).is_none() {
            best = Some((cost, route));
        }
    }
    let (cost, route) = best.ok_or(Error::NoFeasiblePath)?;
    Ok(RobustSolution { route, cost, scenarios: Vec::new(), log: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust::fixtures::{chain, two_routes};
    use crate::robust::{check_route, generate_rtsptw, Scenario};

    #[test]
    fn two_route_toy() {
        let s = brute_force_robust(&two_routes()).unwrap();
        assert_eq!(s.route, vec![0, 2, 1, 3]);
        assert_eq!(s.cost, 9);
    }

    #[test]
    fn nothing_survives() {
        let mut inst = chain();
        inst.deadline = vec![0, 0, 0];
        assert_eq!(brute_force_robust(&inst).unwrap_err(), Error::NoFeasiblePath);
    }

    #[test]
    fn huge_budget_is_interval_uncertainty() {
        for seed in 0..5 {
            let mut inst = generate_rtsptw(6, 30, 4, seed);
            inst.budget = 1_000;
            let robust = brute_force_robust(&inst).unwrap();
            // with every customer at u
            let worst = Scenario { delta: inst.upper.clone() };
            let dd = build_tsp_dd_with(&inst, &TspDdOptions { prune: false, ..Default::default() }).unwrap();
            let best = enumerate_paths(&dd, None)
                .unwrap()
                .map(|p| route_of(&p.values))
                .filter(|r| check_route(&inst, r, &worst).feasible())
                .map(|r| inst.route_cost(&r))
                .min();
            assert_eq!(Some(robust.cost), best);
        }
    }

    #[test]
    fn cap() {
        let inst = generate_rtsptw(11, 20, 2, 0);
        assert!(matches!(brute_force_robust(&inst), Err(Error::CapExceeded(_))));
    }
}
