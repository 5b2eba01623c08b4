use super::{DeadlineSemantics, RtsptwInstance, Scenario};
use crate::milp::{LpModel, RowSense};
use crate::Sense;

/// Arc-flow TSPTW model with one time vector per listed scenario.
///
/// Binaries `x_ij` per edge, out- and in-degree rows, and for every scenario
/// `δ` and edge `w_j^δ ≥ w_i^δ + (δ_i + t_ij) x_ij − M (1 − x_ij)` with
/// `r_j ≤ w_j^δ ≤ d_j`. Without scenarios only the degree rows remain, so
/// subtours are possible.
pub fn build_ip_baseline(inst: &RtsptwInstance, scenarios: &[Scenario]) -> LpModel {
    let nv = inst.num_vertices();
    let n = inst.n;
    let mut m = LpModel::new(Sense::Min);
    let x: Vec<usize> = inst.edges.iter().map(|e| m.add_binary(format!("x_{}_{}", e.from, e.to))).collect();
    m.set_objective(inst.edges.iter().zip(&x).map(|(e, &v)| (v, e.cost as f64)).collect());
    for i in 0..n {
        let terms = inst.edges.iter().zip(&x).filter(|(e, _)| e.from == i).map(|(_, &v)| (v, 1.0)).collect();
        m.add_constraint(format!("out_{i}"), terms, RowSense::Eq, 1.0);
    }
    for j in 1..nv {
        let terms = inst.edges.iter().zip(&x).filter(|(e, _)| e.to == j).map(|(_, &v)| (v, 1.0)).collect();
        m.add_constraint(format!("in_{j}"), terms, RowSense::Eq, 1.0);
    }
    let big = big_m(inst) as f64;
    for (s, sc) in scenarios.iter().enumerate() {
        let w: Vec<usize> = (0..nv)
            .map(|j| {
                let (lo, hi) = if j == 0 {
                    (0.0, f64::INFINITY)
                } else {
                    let slack = match inst.semantics {
                        DeadlineSemantics::Arrival => 0,
                        DeadlineSemantics::Completion => sc.delta[j],
                    };
                    (inst.release[j] as f64, (inst.deadline[j] - slack) as f64)
                };
                m.add_var(format!("w_{j}_s{s}"), lo, hi)
            })
            .collect();
        for (e, &xe) in inst.edges.iter().zip(&x) {
            // w_j − w_i − (δ_i + t_ij + M) x_ij ≥ −M
            let step = (sc.delta[e.from] + e.time) as f64;
            m.add_constraint(
                format!("time_{}_{}_s{s}", e.from, e.to),
                vec![(w[e.to], 1.0), (w[e.from], -1.0), (xe, -(step + big))],
                RowSense::Ge,
                -big,
            );
        }
    }
    m
}

/// Bound on any time a route reaches: the largest deadline, or the latest
/// release plus the longest way out of and service at every vertex if that
/// is smaller. It equals `d_n` whenever the end depot closes last.
pub(crate) fn big_m(inst: &RtsptwInstance) -> i64 {
    let nv = inst.num_vertices();
    let latest = (1..nv).map(|j| inst.deadline[j]).max().unwrap_or(0);
    let mut horizon = inst.release.iter().copied().max().unwrap_or(0);
    for i in 0..nv {
        let out = inst.edges.iter().filter(|e| e.from == i).map(|e| e.time).max().unwrap_or(0);
        horizon = horizon.saturating_add(out + inst.upper[i]);
    }
    latest.min(horizon)
}
