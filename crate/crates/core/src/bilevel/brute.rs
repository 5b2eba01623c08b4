use super::follower::build_follower_dd;
use super::{BilevelInstance, BilevelSolution};
use crate::dd::{enumerate_paths, reduce, DecisionDiagram};
use crate::{Error, Result};

pub const DEFAULT_BRUTE_CAP: usize = 20;

const TIE: f64 = 1e-9;

/// Enumerates every leader decision. For each one the follower's optimal
/// value comes from a longest path over the unblocked arcs; among the
/// follower-optimal paths the leader keeps its favourite. The first leader
/// vector (in binary counting order, `x^L_0` least significant) with the best
/// value wins.
pub fn brute_force_bilevel(inst: &BilevelInstance) -> Result<BilevelSolution> {
    if inst.n > DEFAULT_BRUTE_CAP {
        return Err(Error::CapExceeded(format!("brute force is limited to n <= {DEFAULT_BRUTE_CAP}")));
    }
    let dd = reduce(&build_follower_dd(inst)?);
    let n = inst.n;
    let coupled = inst.leader_b.iter().flatten().any(|&b| b != 0.0);
    let mut best: Option<BilevelSolution> = None;

    for mask in 0u32..(1 << n) {
        let xl: Vec<u8> = (0..n).map(|j| (mask >> j & 1) as u8).collect();
        if !coupled && !inst.leader_feasible(&xl, &vec![0; n]) {
            continue;
        }
        let open = |a: usize| dd.arc(a).value == 0 || xl[dd.arc_layer(a)] == 0;
        let Some((value, tight)) = follower_optimal_arcs(&dd, open) else { continue };
        let response = if coupled {
            best_coupled_response(inst, &dd, &xl, &tight)?
        } else {
            Some(best_response(inst, &dd, &tight))
        };
        let Some(xf) = response else { continue };
        let obj = inst.leader_value(&xl, &xf);
        if best.as_ref().is_none_or(|b| obj > b.leader_objective) {
            best = Some(BilevelSolution {
                x_leader: xl,
                x_follower: xf,
                leader_objective: obj,
                follower_objective: value,
                pi: Vec::new(),
                gamma: Vec::new(),
                nodes: 0,
            });
        }
    }
    best.ok_or(Error::Infeasible)
}

/// Follower optimum over the open arcs, and which arcs lie on an optimal
/// path. `None` if no path survives the blocking.
fn follower_optimal_arcs(dd: &DecisionDiagram, open: impl Fn(usize) -> bool) -> Option<(f64, Vec<bool>)> {
    let mut fwd = vec![f64::NEG_INFINITY; dd.num_nodes()];
    let mut bwd = vec![f64::NEG_INFINITY; dd.num_nodes()];
    fwd[dd.root()] = 0.0;
    bwd[dd.terminal()] = 0.0;
    for layer in dd.layers() {
        for &u in layer {
            for &a in dd.out_arcs(u).iter().filter(|&&a| open(a)) {
                let arc = dd.arc(a);
                fwd[arc.head] = fwd[arc.head].max(fwd[u] + arc.length);
            }
        }
    }
    for layer in dd.layers().iter().rev() {
        for &u in layer {
            for &a in dd.out_arcs(u).iter().filter(|&&a| open(a)) {
                let arc = dd.arc(a);
                bwd[u] = bwd[u].max(arc.length + bwd[arc.head]);
            }
        }
    }
    let opt = fwd[dd.terminal()];
    if opt == f64::NEG_INFINITY {
        return None;
    }
    let tight = dd
        .arcs()
        .iter()
        .map(|a| open(a.id) && fwd[a.tail] + a.length + bwd[a.head] >= opt - TIE * opt.abs().max(1.0))
        .collect();
    Some((opt, tight))
}

/// Leader-best follower-optimal path, leader rows not involving `x^F`.
fn best_response(inst: &BilevelInstance, dd: &DecisionDiagram, tight: &[bool]) -> Vec<u8> {
    let mut val = vec![f64::NEG_INFINITY; dd.num_nodes()];
    let mut choice = vec![usize::MAX; dd.num_nodes()];
    val[dd.terminal()] = 0.0;
    for layer in dd.layers().iter().rev().skip(1) {
        for &u in layer {
            for &a in dd.out_arcs(u).iter().filter(|&&a| tight[a]) {
                let arc = dd.arc(a);
                let cand = inst.c2[dd.node_layer(u)] * arc.value as f64 + val[arc.head];
                if cand > val[u] {
                    val[u] = cand;
                    choice[u] = a;
                }
            }
        }
    }
    let mut xf = vec![0u8; inst.n];
    let mut u = dd.root();
    while u != dd.terminal() {
        let arc = dd.arc(choice[u]);
        xf[dd.node_layer(u)] = arc.value as u8;
        u = arc.head;
    }
    xf
}

/// Leader rows involve `x^F`: enumerate the follower-optimal paths.
fn best_coupled_response(
    inst: &BilevelInstance,
    dd: &DecisionDiagram,
    xl: &[u8],
    tight: &[bool],
) -> Result<Option<Vec<u8>>> {
    let sub = dd.retain_arcs(|a| tight[a.id]).expect("an optimal path exists");
    let mut best: Option<(f64, Vec<u8>)> = None;
    for p in enumerate_paths(&sub, None)? {
        let xf: Vec<u8> = p.values.iter().map(|&v| v as u8).collect();
        if !inst.leader_feasible(xl, &xf) {
            continue;
        }
        let v = inst.leader_value(xl, &xf);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, xf));
        }
    }
    Ok(best.map(|b| b.1))
}
