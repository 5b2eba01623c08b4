//! Cross-method oracles: every solver of a problem class must agree with
//! brute force on random instances.

use cspdd::bilevel::{
    brute_force_bilevel, certify, generate_cpsp, solve_ddr_with, BigMRule, CoeffDist, CpspOptions, DdrOptions,
    PenaltyRule,
};
use cspdd::csp::{
    brute_force_csp, build_flow_milp, expand_state_graph, solve_labeling, solve_pulse, CspInstance, PulseConfig,
    SideConstraints,
};
use cspdd::dd::{compile, enumerate_paths, reduce, KnapsackSpec};
use cspdd::milp::{parse_lp_file, solve_milp, write_lp_file, LpStatus};
use cspdd::robust::{
    brute_force_robust, generate_rtsptw, separate, solve_ip_augmenting, solve_state_augmenting_with, AugmentOptions,
    DeadlineSemantics, RtsptwInstance, ScenarioStrategy,
};
use cspdd::{Error, Sense};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

fn knapsack_csp_parts(
    weights: &[i64],
    profits: &[i64],
    cap: i64,
    side: &[Vec<i64>],
    budget: &[i64],
) -> (cspdd::dd::DecisionDiagram, Vec<(usize, usize, f64)>) {
    let n = weights.len();
    let dd = reduce(&compile(&KnapsackSpec::single(weights.to_vec(), cap, profits.iter().map(|&p| p as f64).collect()), n).unwrap());
    let mut entries = Vec::new();
    for (i, row) in side.iter().enumerate().take(budget.len()) {
        for a in dd.arcs() {
            if a.value == 1 && row[dd.arc_layer(a.id)] != 0 {
                entries.push((i, a.id, row[dd.arc_layer(a.id)] as f64));
            }
        }
    }
    (dd, entries)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csp_solvers_agree(
        weights in proptest::collection::vec(1i64..8, 6),
        profits in proptest::collection::vec(-5i64..12, 6),
        cap in 4i64..25,
        side in proptest::collection::vec(proptest::collection::vec(0i64..6, 6), 2),
        budget in proptest::collection::vec(0i64..15, 1..3),
        max in any::<bool>(),
    ) {
        let (dd, entries) = knapsack_csp_parts(&weights, &profits, cap, &side, &budget);
        let sense = if max { Sense::Max } else { Sense::Min };
        let rhs: Vec<f64> = budget.iter().map(|&b| b as f64).collect();
        let csp = CspInstance::new(&dd, SideConstraints::new(dd.num_arcs(), entries, rhs).unwrap(), sense).unwrap();
        let brute = brute_force_csp(&csp);
        let labeling = solve_labeling(&csp);
        let pulse = solve_pulse(&csp, &PulseConfig::default());
        let milp = solve_milp(&build_flow_milp(&csp)).unwrap();
        let states = expand_state_graph(&csp, None).unwrap().extreme_path(&dd, sense);
        match brute {
            Ok(b) => {
                prop_assert!(csp.side.admits(&b.arcs));
                prop_assert_eq!(labeling.unwrap().objective, b.objective);
                prop_assert_eq!(pulse.unwrap().objective, b.objective);
                prop_assert_eq!(milp.status, LpStatus::Optimal);
                prop_assert!((milp.objective - b.objective).abs() < 1e-6);
                prop_assert_eq!(states.unwrap().objective, b.objective);
            }
            Err(e) => {
                prop_assert_eq!(e, Error::NoFeasiblePath);
                prop_assert!(labeling.is_err());
                prop_assert!(pulse.is_err());
                prop_assert_eq!(milp.status, LpStatus::Infeasible);
                prop_assert!(states.is_none());
            }
        }
    }

    #[test]
    fn reduction_keeps_the_solution_set(
        weights in proptest::collection::vec(1i64..8, 1..8),
        cap in 0i64..20,
    ) {
        let n = weights.len();
        let dd = compile(&KnapsackSpec::single(weights.clone(), cap, vec![1.0; n]), n).unwrap();
        let r = reduce(&dd);
        let set = |d: &cspdd::dd::DecisionDiagram| {
            enumerate_paths(d, None).unwrap().map(|p| p.values).collect::<HashSet<_>>()
        };
        prop_assert!(r.num_nodes() <= dd.num_nodes());
        prop_assert_eq!(set(&r), set(&dd));
        let expected = (0..1u32 << n)
            .filter(|m| (0..n).filter(|&j| m >> j & 1 == 1).map(|j| weights[j]).sum::<i64>() <= cap)
            .count();
        prop_assert_eq!(r.count_paths(), expected as u128);
    }

    #[test]
    fn flow_models_survive_the_lp_file(
        weights in proptest::collection::vec(1i64..8, 5),
        profits in proptest::collection::vec(-5i64..12, 5),
        side in proptest::collection::vec(proptest::collection::vec(0i64..6, 5), 1),
    ) {
        let (dd, entries) = knapsack_csp_parts(&weights, &profits, 12, &side, &[9]);
        let csp = CspInstance::new(&dd, SideConstraints::new(dd.num_arcs(), entries, vec![9.0]).unwrap(), Sense::Max).unwrap();
        let model = build_flow_milp(&csp);
        let parsed = parse_lp_file(&write_lp_file(&model)).unwrap();
        prop_assert!(parsed.same_as(&model));
        let (a, b) = (solve_milp(&model).unwrap(), solve_milp(&parsed).unwrap());
        prop_assert!((a.objective - b.objective).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bilevel_reformulation_matches_enumeration(
        n in 3usize..9,
        t in prop::sample::select(vec![0.2, 0.35, 0.5, 0.8]),
        seed in 0u64..1_000_000,
        penalty in prop::sample::select(vec![PenaltyRule::FollowerProfit, PenaltyRule::LeaderProfit, PenaltyRule::Zero]),
        signed in any::<bool>(),
        general in any::<bool>(),
    ) {
        let opts = CpspOptions { penalty, signed_follower_profit: signed };
        let inst = generate_cpsp(n, t, CoeffDist::U25, seed, &opts).to_bilevel();
        let rule = if general { BigMRule::General } else { BigMRule::Auto };
        let ddr = solve_ddr_with(&inst, &DdrOptions { big_m: rule, ..Default::default() }).unwrap();
        let brute = brute_force_bilevel(&inst).unwrap();
        prop_assert!((ddr.leader_objective - brute.leader_objective).abs() < 1e-6);
        prop_assert!(inst.verify(&ddr).is_ok());
        prop_assert!(inst.verify(&brute).is_ok());
        prop_assert!(certify(&inst, &ddr, rule).unwrap().max_residual() <= 1e-6);
    }
}

/// Generated instance with deadlines pulled towards the nominal seed-tour
/// arrivals and random service bounds, so that scenarios actually bite.
fn tight_instance(n: usize, seed: u64) -> RtsptwInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(0..=6);
    let mut inst = generate_rtsptw(n, rng.gen_range(10..=60), budget, seed);
    for j in 1..n {
        inst.upper[j] = rng.gen_range(0..=5);
        inst.deadline[j] -= rng.gen_range(0..=budget + 4);
        inst.deadline[j] = inst.deadline[j].max(inst.release[j]);
    }
    if rng.gen_bool(0.3) {
        inst.semantics = DeadlineSemantics::Completion;
        for j in 1..n {
            inst.deadline[j] += inst.upper[j];
        }
    }
    inst
}

#[test]
fn robust_solvers_agree_on_tight_instances() {
    let (mut solved, mut multi) = (0, 0);
    for seed in 0..120u64 {
        let n = 4 + (seed % 4) as usize;
        let inst = tight_instance(n, seed);
        inst.validate().unwrap();
        let brute = brute_force_robust(&inst);
        let first = solve_state_augmenting_with(&inst, &AugmentOptions::default());
        let most = solve_state_augmenting_with(
            &inst,
            &AugmentOptions { strategy: ScenarioStrategy::MostViolated, ..Default::default() },
        );
        let ip = solve_ip_augmenting(&inst, &AugmentOptions::default());
        match brute {
            Ok(b) => {
                solved += 1;
                for s in [first.unwrap(), most.unwrap(), ip.unwrap()] {
                    assert_eq!(s.cost, b.cost, "seed {seed}");
                    assert!(separate(&inst, &s.route).is_none(), "seed {seed}");
                    assert!(s.log.windows(2).all(|w| w[0].objective <= w[1].objective));
                    assert_eq!(s.scenarios.iter().collect::<HashSet<_>>().len(), s.scenarios.len());
                    assert!(s.scenarios.iter().all(|d| inst.contains(d)));
                    multi += (s.log.len() > 1) as usize;
                }
            }
            Err(e) => {
                assert_eq!(e, Error::NoFeasiblePath, "seed {seed}");
                assert_eq!(first.unwrap_err(), Error::NoFeasiblePath, "seed {seed}");
                assert_eq!(most.unwrap_err(), Error::NoFeasiblePath, "seed {seed}");
                assert_eq!(ip.unwrap_err(), Error::NoFeasiblePath, "seed {seed}");
            }
        }
    }
    // the suite must exercise both outcomes and real augmentation
    eprintln!("{solved} robust-feasible, {multi} runs with several rounds");
    assert!(solved > 20 && solved < 120, "{solved}");
    assert!(multi > 10, "{multi}");
}
