use super::{ArcSpec, DecisionDiagram};
use crate::{Deadline, Error, Result};
use std::collections::HashMap;
use std::hash::Hash;

/// A recursive model `s_{j+1} = T_j(s_j, x_j)` over `n` decision stages.
///
/// Two states that compare equal at the same layer are merged into one node,
/// so equal states must have identical sets of feasible completions.
pub trait DpSpec {
    type State: Clone + Eq + Hash;

    fn initial_state(&self) -> Self::State;

    /// Admissible values of `x_layer` in `state`.
    fn domain(&self, state: &Self::State, layer: usize) -> Vec<i64>;

    /// Next state, or `None` if the assignment is infeasible.
    fn transition(&self, state: &Self::State, layer: usize, value: i64) -> Option<Self::State>;

    fn stage_cost(&self, state: &Self::State, layer: usize, value: i64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub max_layer_nodes: usize,
    pub deadline: Deadline,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_layer_nodes: 10_000_000, deadline: Deadline::none() }
    }
}

/// A compiled diagram together with the DP state behind every node.
/// The terminal merges all final states and carries `None`.
#[derive(Debug, Clone)]
pub struct Compiled<S> {
    pub dd: DecisionDiagram,
    pub states: Vec<Option<S>>,
}

pub fn compile<S: DpSpec>(spec: &S, num_vars: usize) -> Result<DecisionDiagram> {
    compile_with(spec, num_vars, &CompileOptions::default()).map(|c| c.dd)
}

pub fn compile_with<S: DpSpec>(
    spec: &S,
    num_vars: usize,
    opts: &CompileOptions,
) -> Result<Compiled<S::State>> {
    if num_vars == 0 {
        return Err(Error::InvalidInstance("a diagram needs at least one variable".into()));
    }
    let mut node_layer = vec![0usize];
    let mut node_state: Vec<Option<S::State>> = vec![Some(spec.initial_state())];
    let mut arcs = Vec::new();
    let mut current: Vec<usize> = vec![0];

    for j in 0..num_vars {
        opts.deadline.check()?;
        let last = j + 1 == num_vars;
        let mut index: HashMap<S::State, usize> = HashMap::new();
        let mut next: Vec<usize> = Vec::new();
        let terminal = if last {
            node_layer.push(num_vars);
            node_state.push(None);
            Some(node_layer.len() - 1)
        } else {
            None
        };

        for &u in &current {
            let state = node_state[u].clone().expect("interior node without state");
            let mut values = spec.domain(&state, j);
            values.sort_unstable();
            values.dedup();
            for v in values {
                let Some(succ) = spec.transition(&state, j, v) else { continue };
                let length = spec.stage_cost(&state, j, v);
                let head = match terminal {
                    Some(t) => t,
                    None => match index.get(&succ) {
                        Some(&h) => h,
                        None => {
                            if next.len() >= opts.max_layer_nodes {
                                return Err(Error::LayerExplosion {
                                    layer: j + 1,
                                    cap: opts.max_layer_nodes,
                                });
                            }
                            let h = node_layer.len();
                            node_layer.push(j + 1);
                            node_state.push(Some(succ.clone()));
                            index.insert(succ, h);
                            next.push(h);
                            h
                        }
                    },
                };
                arcs.push(ArcSpec::new(u, head, v, length));
            }
        }
        if !last && next.is_empty() {
            return Err(Error::NoFeasiblePath);
        }
        current = next;
    }

    let (dd, new_id) = DecisionDiagram::build(num_vars, &node_layer, &arcs)?;
    let mut states = vec![None; dd.num_nodes()];
    for (old, state) in node_state.into_iter().enumerate() {
        if new_id[old] != usize::MAX {
            states[new_id[old]] = state;
        }
    }
    Ok(Compiled { dd, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::fixtures::knapsack_spec;

    struct Free;
    impl DpSpec for Free {
        type State = ();
        fn initial_state(&self) {}
        fn domain(&self, _: &(), _: usize) -> Vec<i64> {
            vec![1, 0]
        }
        fn transition(&self, _: &(), _: usize, _: i64) -> Option<()> {
            Some(())
        }
        fn stage_cost(&self, _: &(), _: usize, v: i64) -> f64 {
            v as f64
        }
    }

    #[test]
    fn single_variable() {
        let dd = compile(&Free, 1).unwrap();
        assert_eq!((dd.num_nodes(), dd.num_arcs()), (2, 2));
        assert_eq!(dd.arcs()[0].value, 0);
        assert_eq!(dd.arcs()[1].length, 1.0);
    }

    #[test]
    fn knapsack_layers_before_reduction() {
        let c = compile_with(&knapsack_spec(), 4, &CompileOptions::default()).unwrap();
        assert_eq!(c.dd.layer_widths(), vec![1, 2, 3, 4, 1]);
        let loads: Vec<Vec<i64>> = (0..4)
            .map(|j| {
                let mut v: Vec<i64> =
                    c.dd.layer(j).iter().map(|&u| c.states[u].as_ref().unwrap()[0]).collect();
                v.sort();
                v
            })
            .collect();
        assert_eq!(loads, vec![vec![0], vec![0, 7], vec![0, 5, 7], vec![0, 4, 5, 7]]);
        assert!(c.states[c.dd.terminal()].is_none());
        assert_eq!(c.dd.count_paths(), 8);
    }

    #[test]
    fn layer_cap_trips() {
        let opts = CompileOptions { max_layer_nodes: 2, ..Default::default() };
        let err = compile_with(&knapsack_spec(), 4, &opts).unwrap_err();
        assert_eq!(err, Error::LayerExplosion { layer: 2, cap: 2 });
    }

    #[test]
    fn infeasible_spec() {
        struct Never;
        impl DpSpec for Never {
            type State = u8;
            fn initial_state(&self) -> u8 {
                0
            }
            fn domain(&self, _: &u8, _: usize) -> Vec<i64> {
                vec![0]
            }
            fn transition(&self, _: &u8, j: usize, _: i64) -> Option<u8> {
                (j == 0).then_some(1)
            }
            fn stage_cost(&self, _: &u8, _: usize, _: i64) -> f64 {
                0.0
            }
        }
        assert_eq!(compile(&Never, 3).unwrap_err(), Error::NoFeasiblePath);
    }
}
