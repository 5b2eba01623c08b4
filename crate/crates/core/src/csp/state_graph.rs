use super::{CspInstance, RESOURCE_TOL};
use crate::dd::{ArcId, DecisionDiagram, NodeId, PathSolution};
use crate::{Error, Result, Sense};
use std::collections::HashMap;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// The diagram with every node split by the resource vectors that reach it.
///
/// State nodes are numbered in creation order, which is layer order, so the
/// numbering is topological.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGraph {
    pub nodes: Vec<(NodeId, Vec<f64>)>,
    /// `(tail state, head state, diagram arc)`
    pub arcs: Vec<(usize, usize, ArcId)>,
    per_node: Vec<Vec<usize>>,
}

impl StateGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Resource vectors reaching diagram node `u`, in lexicographic order.
    pub fn states_at(&self, u: NodeId) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = self.per_node[u].iter().map(|&k| self.nodes[k].1.clone()).collect();
        v.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// Best path from the root state to any terminal state.
    pub fn extreme_path(&self, dd: &DecisionDiagram, sense: Sense) -> Option<PathSolution> {
        let sign = sense.sign();
        let mut best = vec![f64::INFINITY; self.nodes.len()];
        let mut pred: Vec<Option<usize>> = vec![None; self.nodes.len()];
        best[0] = 0.0;
        for (k, &(tail, head, a)) in self.arcs.iter().enumerate() {
            let cand = best[tail] + sign * dd.arc(a).length;
            if cand < best[head] {
                best[head] = cand;
                pred[head] = Some(k);
            }
        }
        let end = self.per_node[dd.terminal()]
            .iter()
            .copied()
            .filter(|&k| best[k].is_finite())
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))?;
        let mut arcs = Vec::new();
        let mut k = end;
        while let Some(e) = pred[k] {
            arcs.push(self.arcs[e].2);
            k = self.arcs[e].0;
        }
        arcs.reverse();
        Some(PathSolution::from_arcs(dd, arcs))
    }
}

/// Exact forward expansion from `(root, 0)`, keeping every reachable state
/// that respects the budget.
pub fn expand_state_graph(csp: &CspInstance, cap: Option<usize>) -> Result<StateGraph> {
    let cap = cap.unwrap_or(DEFAULT_STATE_CAP);
    let dd = csp.dd;
    let d = csp.side.budget();
    let key = |s: &[f64]| s.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<u64>>();

    let mut nodes = vec![(dd.root(), vec![0.0; csp.side.num_rows()])];
    let mut per_node: Vec<Vec<usize>> = vec![Vec::new(); dd.num_nodes()];
    per_node[dd.root()].push(0);
    let mut index: Vec<HashMap<Vec<u64>, usize>> = vec![HashMap::new(); dd.num_nodes()];
    index[dd.root()].insert(key(&nodes[0].1), 0);
    let mut arcs = Vec::new();

    for layer in dd.layers().iter().take(dd.num_vars()) {
        for &u in layer {
            for pos in 0..per_node[u].len() {
                let k = per_node[u][pos];
                for &a in dd.out_arcs(u) {
                    let mut s = nodes[k].1.clone();
                    for &(i, g) in csp.side.column(a) {
                        s[i] += g;
                    }
                    if s.iter().zip(d).any(|(x, b)| *x > b + RESOURCE_TOL) {
                        continue;
                    }
                    let head = dd.arc(a).head;
                    let kk = key(&s);
                    let h = match index[head].get(&kk) {
                        Some(&h) => h,
                        None => {
                            if nodes.len() >= cap {
                                return Err(Error::StateCapExceeded { cap });
                            }
                            nodes.push((head, s));
                            per_node[head].push(nodes.len() - 1);
                            index[head].insert(kk, nodes.len() - 1);
                            nodes.len() - 1
                        }
                    };
                    arcs.push((k, h, a));
                }
            }
        }
    }
    Ok(StateGraph { nodes, arcs, per_node })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::fixtures::{example2_dd, example2_side};
    use crate::csp::solve_labeling;

    #[test]
    fn example2_states() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        let g = expand_state_graph(&csp, None).unwrap();
        let sets: Vec<Vec<f64>> = (0..dd.num_nodes())
            .map(|u| g.states_at(u).into_iter().map(|s| s[0]).collect())
            .collect();
        // layer order: r | x1=0, x1=1 | (0,0), merged | one node | t
        assert_eq!(sets[1], vec![0.0]);
        assert_eq!(sets[2], vec![5.0]);
        assert_eq!(sets[3], vec![0.0]);
        assert_eq!(sets[4], vec![2.0, 5.0]);
        assert_eq!(sets[5], vec![0.0, 2.0, 5.0]);
        // every reachable terminal state, including those a drawing may omit
        assert_eq!(sets[6], vec![0.0, 2.0, 5.0, 7.0]);
        assert_eq!(g.num_nodes(), 13);
        let p = g.extreme_path(&dd, Sense::Max).unwrap();
        assert_eq!(p.objective, solve_labeling(&csp).unwrap().objective);
    }

    #[test]
    fn no_rows_is_the_diagram() {
        let dd = example2_dd();
        let csp = CspInstance::unconstrained(&dd, Sense::Max);
        let g = expand_state_graph(&csp, None).unwrap();
        assert_eq!((g.num_nodes(), g.num_arcs()), (dd.num_nodes(), dd.num_arcs()));
    }

    #[test]
    fn cap_trips() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        assert_eq!(expand_state_graph(&csp, Some(5)), Err(Error::StateCapExceeded { cap: 5 }));
    }
}
