use super::{ArcSpec, DecisionDiagram};
use std::collections::HashMap;

/// Merges nodes with identical outgoing signatures, bottom-up.
///
/// Two nodes of the same layer are merged when their outgoing arcs agree on
/// (head, value, length) after the heads have themselves been merged. The
/// multiset of path solutions and objectives is unchanged.
pub fn reduce(dd: &DecisionDiagram) -> DecisionDiagram {
    let n = dd.num_vars();
    let mut rep: Vec<usize> = (0..dd.num_nodes()).collect();

    for j in (1..n).rev() {
        let mut seen: HashMap<Vec<(usize, i64, u64)>, usize> = HashMap::new();
        for &u in dd.layer(j) {
            let mut sig: Vec<(usize, i64, u64)> = dd
                .out_arcs(u)
                .iter()
                .map(|&a| {
                    let arc = dd.arc(a);
                    // +0.0 so that -0.0 and 0.0 share a signature
                    (rep[arc.head], arc.value, (arc.length + 0.0).to_bits())
                })
                .collect();
            sig.sort_unstable();
            rep[u] = *seen.entry(sig).or_insert(u);
        }
    }

    let node_layer: Vec<usize> = (0..dd.num_nodes()).map(|u| dd.node_layer(u)).collect();
    let arcs: Vec<ArcSpec> = dd
        .arcs()
        .iter()
        .filter(|a| rep[a.tail] == a.tail)
        .map(|a| ArcSpec::new(a.tail, rep[a.head], a.value, a.length))
        .collect();
    DecisionDiagram::from_parts(n, &node_layer, &arcs).expect("reduction keeps every path")
}
