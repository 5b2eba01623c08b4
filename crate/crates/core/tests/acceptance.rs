//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

use cspdd::bilevel::{
    brute_force_bilevel, build_follower_dd, build_follower_lp, certify, generate_cpsp, solve_ddr_with, BigMRule,
    BilevelInstance, CoeffDist, CpspOptions, DdrOptions, Follower,
};
use cspdd::csp::{
    brute_force_csp, build_flow_milp, expand_state_graph, solve_labeling, solve_pulse, CspInstance, PulseConfig,
    SideConstraints,
};
use cspdd::dd::{compile, extreme_path, reduce, DecisionDiagram, KnapsackSpec, PathSolution};
use cspdd::milp::{solve_lp, solve_milp, LpStatus};
use cspdd::robust::{
    brute_force_robust, build_tsp_dd_with, check_route, enumerate_scenarios, generate_rtsptw, separate,
    solve_ip_augmenting, solve_state_augmenting, worst_case_times, AugmentOptions, RtsptwInstance, TspDdOptions,
};
use cspdd::Sense;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn knapsack_dd() -> DecisionDiagram {
    reduce(&compile(&KnapsackSpec::single(vec![7, 5, 4, 1], 8, vec![4.0, 3.0, 7.0, 8.0]), 4).unwrap())
}

fn criterion_1() -> Outcome {
    let dd = knapsack_dd();
    let p = extreme_path(&dd, Sense::Max);
    let best = (0..5)
        .map(|_| {
            let t = Instant::now();
            let dd = knapsack_dd();
            let _ = extreme_path(&dd, Sense::Max);
            t.elapsed()
        })
        .min()
        .unwrap();
    let pass = dd.num_nodes() == 7
        && dd.num_arcs() == 10
        && p.objective == 15.0
        && p.values == [0, 0, 1, 1]
        && best < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "{} nodes, {} arcs, longest path {} at x={:?}, {:.1} µs",
            dd.num_nodes(),
            dd.num_arcs(),
            p.objective,
            p.values,
            best.as_secs_f64() * 1e6
        ),
    )
}

fn criterion_2() -> Outcome {
    let dd = knapsack_dd();
    let g = [5.0, 2.0, 2.0, 7.0];
    let side = SideConstraints::single_row(&dd, 7.0, |a| if dd.arc(a).value == 1 { g[dd.arc_layer(a)] } else { 0.0 })
        .unwrap();
    let csp = CspInstance::new(&dd, side, Sense::Max).unwrap();
    let mut answers: Vec<(&str, PathSolution)> = vec![
        ("labeling", solve_labeling(&csp).unwrap()),
        ("pulse", solve_pulse(&csp, &PulseConfig::default()).unwrap()),
        ("brute", brute_force_csp(&csp).unwrap()),
    ];
    let milp = solve_milp(&build_flow_milp(&csp)).unwrap();
    let mut arcs: Vec<usize> = (0..dd.num_arcs()).filter(|&a| milp.x[a] > 0.5).collect();
    arcs.sort_by_key(|&a| dd.arc_layer(a));
    answers.push(("milp", PathSolution::from_arcs(&dd, arcs)));
    let solved = milp.status == LpStatus::Optimal
        && answers.iter().all(|(_, p)| p.objective == 8.0 && p.values == [0, 0, 0, 1]);

    let graph = expand_state_graph(&csp, None).unwrap();
    let mut per_layer: Vec<Vec<Vec<i64>>> = vec![Vec::new(); dd.num_vars() + 1];
    for u in 0..dd.num_nodes() {
        per_layer[dd.node_layer(u)].push(graph.states_at(u).iter().map(|s| s[0] as i64).collect());
    }
    for l in &mut per_layer {
        l.sort();
    }
    let expected: Vec<Vec<Vec<i64>>> =
        vec![vec![vec![0]], vec![vec![0], vec![5]], vec![vec![0], vec![2, 5]], vec![vec![0, 2, 5]], vec![vec![0, 7]]];
    let states_ok = graph.num_nodes() == 11 && per_layer == expected;
    let objs: Vec<String> = answers.iter().map(|(m, p)| format!("{m}={}", p.objective)).collect();
    outcome(
        solved && states_ok,
        format!(
            "optimum {} at x={:?}; state network has {} states (expected 11), label sets per layer {:?}",
            objs.join(" "),
            answers[0].1.values,
            graph.num_nodes(),
            per_layer
        ),
    )
}

fn criterion_3() -> Outcome {
    let follower = BilevelInstance {
        n: 3,
        c1: vec![0.0; 3],
        c2: vec![0.0; 3],
        leader_a: vec![],
        leader_b: vec![],
        leader_rhs: vec![],
        follower: Follower::Knapsack { rows: vec![vec![2, 2, 4]], rhs: vec![5], objective: vec![1.0, 1.0, 1.0] },
    };
    let fdd = build_follower_dd(&follower).unwrap();
    let fpaths = fdd.count_paths();
    let tsp = generate_rtsptw(4, 1_000_000, 0, 0);
    let tdd = build_tsp_dd_with(&tsp, &TspDdOptions { prune: false, ..Default::default() }).unwrap();
    let pass = fpaths == 5 && reduce(&fdd).count_paths() == 5 && (tdd.num_nodes(), tdd.num_arcs(), tdd.count_paths()) == (14, 18, 6);
    outcome(
        pass,
        format!(
            "follower diagram: {fpaths} paths; TSP diagram: {} nodes, {} arcs, {} paths",
            tdd.num_nodes(),
            tdd.num_arcs(),
            tdd.count_paths()
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let configs = [(8, 0.2), (8, 0.5), (10, 0.2), (10, 0.5), (12, 0.2), (12, 0.5)];
    let mut bad = Vec::new();
    for i in 0..200 {
        let (n, t) = configs[i % configs.len()];
        let seed = (i / configs.len()) as u64;
        let inst = generate_cpsp(n, t, CoeffDist::U25, seed, &CpspOptions::default()).to_bilevel();
        let ddr = solve_ddr_with(&inst, &DdrOptions::default()).map(|s| s.leader_objective);
        let brute = brute_force_bilevel(&inst).map(|s| s.leader_objective);
        if !matches!((&ddr, &brute), (Ok(a), Ok(b)) if (a - b).abs() <= 1e-6) {
            bad.push(format!("n={n} t={t} seed={seed}: {ddr:?} vs {brute:?}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad.is_empty() && secs < 300.0, format!("{} of 200 differ, {secs:.1} s {:?}", bad.len(), bad))
}

fn criterion_5() -> Outcome {
    let opts = CpspOptions { signed_follower_profit: true, ..Default::default() };
    let ddr = DdrOptions { big_m: BigMRule::General, ..Default::default() };
    let configs = [(8, 0.2), (8, 0.5), (10, 0.2), (10, 0.5)];
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (n, t) = configs[i % configs.len()];
        let seed = 1_000 + (i / configs.len()) as u64;
        let inst = generate_cpsp(n, t, CoeffDist::U25, seed, &opts).to_bilevel();
        let (sol, brute) = match (solve_ddr_with(&inst, &ddr), brute_force_bilevel(&inst)) {
            (Ok(s), Ok(b)) => (s, b),
            (a, b) => {
                bad.push(format!("n={n} t={t} seed={seed}: {:?} / {:?}", a.err(), b.err()));
                continue;
            }
        };
        let res = certify(&inst, &sol, BigMRule::General).map(|c| c.max_residual()).unwrap_or(f64::INFINITY);
        worst = worst.max(res);
        if (sol.leader_objective - brute.leader_objective).abs() > 1e-6 || res > 1e-6 || inst.verify(&sol).is_err() {
            bad.push(format!("n={n} t={t} seed={seed}: {} vs {}, residual {res:e}", sol.leader_objective, brute.leader_objective));
        }
    }
    outcome(bad.is_empty(), format!("{} of 100 fail, largest residual {worst:.2e} {:?}", bad.len(), bad))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(1..=3);
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..=9)).collect()).collect();
        let rhs: Vec<i64> = rows.iter().map(|r| (r.iter().sum::<i64>() as f64 * rng.gen_range(0.2..0.8)) as i64).collect();
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-10..=20) as f64).collect();
        let inst = BilevelInstance {
            n,
            c1: vec![0.0; n],
            c2: vec![0.0; n],
            leader_a: vec![],
            leader_b: vec![],
            leader_rhs: vec![],
            follower: Follower::Knapsack { rows, rhs, objective },
        };
        let dd = reduce(&build_follower_dd(&inst).unwrap());
        let block: Vec<u8> = (0..n).map(|_| rng.gen_bool(0.3) as u8).collect();
        match solve_lp(&build_follower_lp(&dd, &block)) {
            Ok(s) if s.status == LpStatus::Optimal => {
                let frac = s.x.iter().map(|v| (v - v.round()).abs()).fold(0.0, f64::max);
                worst = worst.max(frac);
                if frac > 1e-7 {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
    }
    outcome(failures == 0, format!("{failures} of 100 fractional or unsolved, largest gap {worst:.1e}"))
}

fn robust_suite() -> Vec<(usize, i64, i64, u64)> {
    let mut out = Vec::new();
    for i in 0..100u64 {
        let n = [6, 7, 8][(i % 3) as usize];
        let b = [2, 4][(i / 3 % 2) as usize];
        let w = [20, 40, 60, 80][(i / 6 % 4) as usize];
        out.push((n, w, b, i / 24));
    }
    out
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut rounds = 0;
    for (n, w, b, seed) in robust_suite() {
        let inst = generate_rtsptw(n, w, b, seed);
        let tag = format!("n={n} w={w} b={b} seed={seed}");
        let (dd, brute) = (solve_state_augmenting(&inst), brute_force_robust(&inst));
        match (dd, brute) {
            (Ok(s), Ok(r)) => {
                rounds += s.log.len();
                let mono = s.log.windows(2).all(|p| p[0].objective <= p[1].objective);
                let distinct = s.scenarios.iter().collect::<HashSet<_>>().len() == s.scenarios.len();
                if s.cost != r.cost || !mono || !distinct || separate(&inst, &s.route).is_some() {
                    bad.push(format!("{tag}: {} vs {}, monotone {mono}, distinct {distinct}", s.cost, r.cost));
                }
            }
            (Err(a), Err(b)) if a == b => {}
            (a, b) => bad.push(format!("{tag}: {:?} vs {:?}", a.map(|s| s.cost), b.map(|s| s.cost))),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 600.0,
        format!("{} of 100 differ, {rounds} augmentation rounds, {secs:.1} s {:?}", bad.len(), bad),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut bad, mut late, mut largest) = (0, 0, 0);
    for k in 0..100u64 {
        let n = rng.gen_range(4..=9);
        let mut inst: RtsptwInstance = generate_rtsptw(n, rng.gen_range(0..=40), rng.gen_range(0..=6), 100 + k);
        for j in 1..n {
            inst.upper[j] = rng.gen_range(0..=4);
        }
        let scenarios = match enumerate_scenarios(&inst, Some(10_000)) {
            Ok(s) => s,
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        largest = largest.max(scenarios.len());
        let mut route: Vec<usize> = (1..n).collect();
        if rng.gen_bool(0.5) {
            route.shuffle(&mut rng);
        } else {
            route = inst.meta.as_ref().unwrap().seed_tour[1..n].to_vec();
        }
        let route: Vec<usize> = std::iter::once(0).chain(route).chain(std::iter::once(n)).collect();
        let mut worst = vec![0; route.len()];
        let mut any_late = false;
        for s in &scenarios {
            let c = check_route(&inst, &route, s);
            any_late |= !c.feasible();
            for (w, a) in worst.iter_mut().zip(&c.arrival).skip(1) {
                *w = (*w).max(*a);
            }
        }
        late += any_late as usize;
        if worst_case_times(&inst, &route) != worst || separate(&inst, &route).is_some() != any_late {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("{bad} of 100 disagree ({late} routes not robust, up to {largest} scenarios per instance)"),
    )
}

fn criterion_9() -> Outcome {
    let (mut nodes, mut arcs) = (0.0, 0.0);
    for seed in 0..20 {
        let inst = generate_cpsp(30, 0.1, CoeffDist::U25, seed, &CpspOptions::default()).to_bilevel();
        let dd = reduce(&build_follower_dd(&inst).unwrap());
        nodes += dd.num_nodes() as f64 / 20.0;
        arcs += dd.num_arcs() as f64 / 20.0;
    }
    let within = |v: f64, target: f64| (v - target).abs() <= 0.25 * target;
    outcome(
        within(nodes, 403.0) && within(arcs, 783.0),
        format!("mean {nodes:.1} nodes (target 403 ± 25%), {arcs:.1} arcs (target 783 ± 25%)"),
    )
}

fn criterion_10() -> Outcome {
    let (mut dd_time, mut ip_time) = (Duration::ZERO, Duration::ZERO);
    let mut count = 0;
    let mut agree = true;
    for (n, w, b, seed) in robust_suite().into_iter().filter(|t| t.0 == 8) {
        let inst = generate_rtsptw(n, w, b, seed);
        let t = Instant::now();
        let a = solve_state_augmenting(&inst).map(|s| s.cost);
        dd_time += t.elapsed();
        let t = Instant::now();
        let c = solve_ip_augmenting(&inst, &AugmentOptions::default()).map(|s| s.cost);
        ip_time += t.elapsed();
        agree &= a == c;
        count += 1;
    }
    outcome(
        dd_time <= ip_time,
        format!(
            "{count} instances: DD-RO {:.3} s, IP {:.3} s, objectives agree: {agree}",
            dd_time.as_secs_f64(),
            ip_time.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("knapsack diagram and longest path", criterion_1),
        ("constrained optimum and state network", criterion_2),
        ("follower and TSP diagrams", criterion_3),
        ("bilevel exactness on 200 instances", criterion_4),
        ("signed follower profits and certificates", criterion_5),
        ("integral follower LP vertices", criterion_6),
        ("robust exactness on 100 instances", criterion_7),
        ("separation against enumeration", criterion_8),
        ("reduced follower diagram size", criterion_9),
        ("DD-RO time versus the IP variant", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {}: {} ({:.1} s) {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
