use super::RtsptwInstance;
use crate::dd::{ArcSpec, DecisionDiagram};
use crate::{Deadline, Error, Result};
use std::collections::HashMap;

/// Node state of the TSP diagram: the visited set and the last vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TspDdState {
    pub visited: u64,
    pub last: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TspDdOptions {
    /// Drop arcs whose earliest arrival under `δ = l` already misses the
    /// deadline.
    pub prune: bool,
    pub max_vertices: usize,
    pub max_layer_nodes: usize,
    pub deadline: Deadline,
}

impl Default for TspDdOptions {
    fn default() -> Self {
        TspDdOptions { prune: true, max_vertices: 16, max_layer_nodes: 2_000_000, deadline: Deadline::none() }
    }
}

pub fn build_tsp_dd(inst: &RtsptwInstance) -> Result<DecisionDiagram> {
    build_tsp_dd_with(inst, &TspDdOptions::default())
}

/// Diagram of the Hamiltonian 0–n paths. Layer `j` holds one node per
/// reachable `(S, L)`; the arc out of it labelled `v` moves to
/// `(S ∪ {v}, v)` at length `c_{L v}`. The end depot is only entered from
/// the last layer.
pub fn build_tsp_dd_with(inst: &RtsptwInstance, opts: &TspDdOptions) -> Result<DecisionDiagram> {
    inst.validate()?;
    let n = inst.n;
    if n + 1 > opts.max_vertices.min(64) {
        return Err(Error::CapExceeded(format!(
            "{} vertices exceed the diagram cap of {}",
            n + 1,
            opts.max_vertices.min(64)
        )));
    }
    let nv = n + 1;
    let table = inst.edge_table();
    let nominal = &inst.lower;

    let mut node_layer = vec![0usize];
    // earliest completion at each node under δ = l, over all paths into it
    let mut early = vec![0i64];
    let mut arcs = Vec::new();
    let mut current: Vec<(TspDdState, usize)> = vec![(TspDdState { visited: 1, last: 0 }, 0)];
    let terminal_set: u64 = (1u64 << nv) - 1;

    for layer in 0..n {
        opts.deadline.check()?;
        let mut next: HashMap<TspDdState, usize> = HashMap::new();
        let mut order = Vec::new();
        for &(s, u) in &current {
            let candidates: Vec<usize> =
                if layer + 1 == n { vec![n] } else { (1..n).filter(|v| s.visited >> v & 1 == 0).collect() };
            for v in candidates {
                let Some((cost, time)) = table[s.last * nv + v] else { continue };
                let arrival = inst.release[v].max(early[u] + time);
                if opts.prune && inst.checked_time(arrival, nominal[v]) > inst.deadline[v] {
                    continue;
                }
                let t = TspDdState { visited: s.visited | 1 << v, last: v };
                let head = *next.entry(t).or_insert_with(|| {
                    node_layer.push(layer + 1);
                    early.push(i64::MAX);
                    order.push(t);
                    node_layer.len() - 1
                });
                early[head] = early[head].min(arrival + nominal[v]);
                arcs.push(ArcSpec::new(u, head, v as i64, cost as f64));
            }
        }
        if next.len() > opts.max_layer_nodes {
            return Err(Error::LayerExplosion { layer: layer + 1, cap: opts.max_layer_nodes });
        }
        if next.is_empty() {
            return Err(Error::NoFeasiblePath);
        }
        current = order.into_iter().map(|t| (t, next[&t])).collect();
    }
    debug_assert!(current.iter().all(|(s, _)| s.visited == terminal_set));
    DecisionDiagram::from_parts(n, &node_layer, &arcs)
}

/// Last visited vertex of every node: the label of its incoming arcs, or 0
/// at the root.
pub fn last_vertices(dd: &DecisionDiagram) -> Vec<usize> {
    let mut last = vec![0usize; dd.num_nodes()];
    for a in dd.arcs() {
        last[a.head] = a.value as usize;
    }
    last
}

/// Vertex sequence `0, v_1, …, n` spelled by a path.
pub fn route_of(values: &[i64]) -> Vec<usize> {
    std::iter::once(0).chain(values.iter().map(|&v| v as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::enumerate_paths;
    use crate::robust::fixtures::{chain, complete};
    use crate::robust::{check_route, enumerate_scenarios};

    #[test]
    fn four_city_diagram() {
        let inst = complete(4, |i, j| (i * 10 + j) as i64);
        let dd = build_tsp_dd(&inst).unwrap();
        assert_eq!(dd.num_nodes(), 14);
        assert_eq!(dd.num_arcs(), 18);
        assert_eq!(dd.count_paths(), 6);
        assert_eq!(dd.layer_widths(), vec![1, 3, 6, 3, 1]);
        for p in enumerate_paths(&dd, None).unwrap() {
            let r = route_of(&p.values);
            assert_eq!(p.objective as i64, inst.route_cost(&r));
            inst.validate_route(&r).unwrap();
        }
    }

    #[test]
    fn two_vertices_is_a_chain() {
        let inst = chain();
        let dd = build_tsp_dd(&inst).unwrap();
        assert_eq!(dd.num_nodes(), 3);
        assert_eq!(dd.count_paths(), 1);
    }

    #[test]
    fn tight_windows_force_the_order() {
        // unit distances; vertex v must be reached exactly at time v
        let mut inst = complete(5, |_, _| 1);
        for v in 1..5 {
            inst.release[v] = v as i64;
            inst.deadline[v] = v as i64;
        }
        inst.deadline[5] = 5;
        let dd = build_tsp_dd(&inst).unwrap();
        let paths: Vec<_> = enumerate_paths(&dd, None).unwrap().collect();
        assert_eq!(paths.len(), 1);
        assert_eq!(route_of(&paths[0].values), vec![0, 1, 2, 3, 4, 5]);

        // enumeration of permutations filtered by nominal windows agrees
        let unpruned = build_tsp_dd_with(&inst, &TspDdOptions { prune: false, ..Default::default() }).unwrap();
        let ok = enumerate_paths(&unpruned, None)
            .unwrap()
            .filter(|p| check_route(&inst, &route_of(&p.values), &inst.nominal()).feasible())
            .count();
        assert_eq!(ok, 1);
    }

    #[test]
    fn pruning_keeps_every_robust_route() {
        let mut inst = complete(5, |i, j| ((i * 7 + j * 3) % 5 + 1) as i64);
        inst.deadline = vec![0, 6, 9, 12, 8, 30];
        inst.upper = vec![0, 1, 2, 1, 2, 0];
        inst.budget = 3;
        let full = build_tsp_dd_with(&inst, &TspDdOptions { prune: false, ..Default::default() }).unwrap();
        let pruned = build_tsp_dd(&inst).unwrap();
        let scen = enumerate_scenarios(&inst, None).unwrap();
        let robust = |dd: &DecisionDiagram| -> Vec<Vec<usize>> {
            let mut v: Vec<_> = enumerate_paths(dd, None)
                .unwrap()
                .map(|p| route_of(&p.values))
                .filter(|r| scen.iter().all(|s| check_route(&inst, r, s).feasible()))
                .collect();
            v.sort();
            v
        };
        assert!(pruned.count_paths() < full.count_paths());
        assert_eq!(robust(&full), robust(&pruned));
    }

    #[test]
    fn nothing_fits() {
        let mut inst = chain();
        inst.deadline = vec![0, 0, 0];
        assert_eq!(build_tsp_dd(&inst), Err(Error::NoFeasiblePath));
    }

    #[test]
    fn vertex_cap() {
        let inst = complete(16, |_, _| 1);
        assert!(matches!(build_tsp_dd(&inst), Err(Error::CapExceeded(_))));
    }
}
