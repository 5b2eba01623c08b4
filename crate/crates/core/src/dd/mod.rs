//! Layered decision diagrams.
//!
//! A diagram over `n` variables has `n + 1` layers; layer `0` holds the root
//! and layer `n` the terminal. An arc leaving layer `j` assigns `x_j` its
//! value, so an r–t path spells out a full solution and its length is the
//! objective value of that solution.
//!
//! Diagrams are immutable once built. Every constructor goes through the same
//! canonicalisation: nodes that are unreachable from the root or cannot reach
//! the terminal are dropped, nodes are numbered layer by layer, and arcs are
//! sorted by `(layer, tail, value)`. Arc ids therefore double as the
//! deterministic tie-breaking order used by the path algorithms.

mod compile;
mod dot;
mod knapsack;
mod paths;
mod reduce;

pub use compile::{compile, compile_with, CompileOptions, Compiled, DpSpec};
pub use dot::export_dot;
pub use knapsack::KnapsackSpec;
pub use paths::{enumerate_paths, extreme_path, PathIter, DEFAULT_PATH_CAP};
pub use reduce::reduce;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
    pub value: i64,
    pub length: f64,
}

/// Arc description used when assembling a diagram by hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSpec {
    pub tail: NodeId,
    pub head: NodeId,
    pub value: i64,
    pub length: f64,
}

impl ArcSpec {
    pub fn new(tail: NodeId, head: NodeId, value: i64, length: f64) -> Self {
        ArcSpec { tail, head, value, length }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionDiagram {
    num_vars: usize,
    layers: Vec<Vec<NodeId>>,
    node_layer: Vec<usize>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
}

/// An r–t path together with the solution it encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    pub arcs: Vec<ArcId>,
    pub values: Vec<i64>,
    pub objective: f64,
}

impl PathSolution {
    pub fn from_arcs(dd: &DecisionDiagram, arcs: Vec<ArcId>) -> Self {
        let values = arcs.iter().map(|&a| dd.arc(a).value).collect();
        let objective = arcs.iter().map(|&a| dd.arc(a).length).sum();
        PathSolution { arcs, values, objective }
    }
}

impl DecisionDiagram {
    /// Builds a diagram from raw parts.
    ///
    /// `node_layer[u]` is the layer of node `u`. Layer `0` and layer
    /// `num_vars` must each contain exactly one node. Nodes that do not lie on
    /// any r–t path are removed together with their arcs.
    pub fn from_parts(num_vars: usize, node_layer: &[usize], arcs: &[ArcSpec]) -> Result<Self> {
        Self::build(num_vars, node_layer, arcs).map(|(dd, _)| dd)
    }

    /// Like [`DecisionDiagram::from_parts`], also returning the new id of
    /// every input node (`usize::MAX` for dropped nodes).
    pub(crate) fn build(
        num_vars: usize,
        node_layer: &[usize],
        arcs: &[ArcSpec],
    ) -> Result<(Self, Vec<usize>)> {
        if num_vars == 0 {
            return Err(Error::InvalidInstance("a diagram needs at least one variable".into()));
        }
        let nn = node_layer.len();
        let roots: Vec<_> = (0..nn).filter(|&u| node_layer[u] == 0).collect();
        let terms: Vec<_> = (0..nn).filter(|&u| node_layer[u] == num_vars).collect();
        if roots.len() != 1 || terms.len() != 1 {
            return Err(Error::InvalidInstance(format!(
                "expected one root and one terminal, found {} and {}",
                roots.len(),
                terms.len()
            )));
        }
        if let Some(&l) = node_layer.iter().find(|&&l| l > num_vars) {
            return Err(Error::InvalidInstance(format!("node layer {l} beyond {num_vars}")));
        }
        for a in arcs {
            if a.tail >= nn || a.head >= nn {
                return Err(Error::InvalidInstance("arc endpoint out of range".into()));
            }
            if node_layer[a.head] != node_layer[a.tail] + 1 {
                return Err(Error::InvalidInstance(format!(
                    "arc {}->{} skips layers",
                    a.tail, a.head
                )));
            }
        }
        let (root, terminal) = (roots[0], terms[0]);

        let mut out: Vec<Vec<usize>> = vec![Vec::new(); nn];
        let mut inn: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for (i, a) in arcs.iter().enumerate() {
            out[a.tail].push(i);
            inn[a.head].push(i);
        }
        let mut fwd = vec![false; nn];
        let mut order: Vec<usize> = (0..nn).collect();
        order.sort_by_key(|&u| (node_layer[u], u));
        fwd[root] = true;
        for &u in &order {
            if fwd[u] {
                for &i in &out[u] {
                    fwd[arcs[i].head] = true;
                }
            }
        }
        if !fwd[terminal] {
            return Err(Error::NoFeasiblePath);
        }
        let mut bwd = vec![false; nn];
        bwd[terminal] = true;
        for &u in order.iter().rev() {
            if bwd[u] {
                for &i in &inn[u] {
                    bwd[arcs[i].tail] = true;
                }
            }
        }

        let mut new_id = vec![usize::MAX; nn];
        let mut layers: Vec<Vec<NodeId>> = vec![Vec::new(); num_vars + 1];
        let mut new_layer = Vec::new();
        for &u in &order {
            if fwd[u] && bwd[u] {
                new_id[u] = new_layer.len();
                layers[node_layer[u]].push(new_layer.len());
                new_layer.push(node_layer[u]);
            }
        }
        if layers.iter().any(|l| l.is_empty()) {
            return Err(Error::NoFeasiblePath);
        }

        let mut kept: Vec<ArcSpec> = arcs
            .iter()
            .filter(|a| new_id[a.tail] != usize::MAX && new_id[a.head] != usize::MAX)
            .map(|a| ArcSpec { tail: new_id[a.tail], head: new_id[a.head], ..*a })
            .collect();
        // Node ids are already layer-ordered, so sorting by tail sorts by layer.
        kept.sort_by(|a, b| {
            (a.tail, a.value, a.head)
                .cmp(&(b.tail, b.value, b.head))
                .then(a.length.total_cmp(&b.length))
        });

        let n_nodes = new_layer.len();
        let mut out_arcs = vec![Vec::new(); n_nodes];
        let mut in_arcs = vec![Vec::new(); n_nodes];
        let arcs: Vec<Arc> = kept
            .into_iter()
            .enumerate()
            .map(|(id, a)| {
                out_arcs[a.tail].push(id);
                in_arcs[a.head].push(id);
                Arc { id, tail: a.tail, head: a.head, value: a.value, length: a.length }
            })
            .collect();

        let dd = DecisionDiagram { num_vars, layers, node_layer: new_layer, arcs, out_arcs, in_arcs };
        Ok((dd, new_id))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_nodes(&self) -> usize {
        self.node_layer.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn root(&self) -> NodeId {
        self.layers[0][0]
    }

    pub fn terminal(&self) -> NodeId {
        self.layers[self.num_vars][0]
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn layer(&self, j: usize) -> &[NodeId] {
        &self.layers[j]
    }

    pub fn node_layer(&self, u: NodeId) -> usize {
        self.node_layer[u]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a]
    }

    /// Layer of the tail of `a`, i.e. the index of the variable it assigns.
    pub fn arc_layer(&self, a: ArcId) -> usize {
        self.node_layer[self.arcs[a].tail]
    }

    pub fn out_arcs(&self, u: NodeId) -> &[ArcId] {
        &self.out_arcs[u]
    }

    pub fn in_arcs(&self, u: NodeId) -> &[ArcId] {
        &self.in_arcs[u]
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// Number of r–t paths, saturating at `u128::MAX`.
    pub fn count_paths(&self) -> u128 {
        let mut count = vec![0u128; self.num_nodes()];
        count[self.terminal()] = 1;
        for layer in self.layers.iter().rev().skip(1) {
            for &u in layer {
                count[u] = self.out_arcs[u]
                    .iter()
                    .fold(0u128, |acc, &a| acc.saturating_add(count[self.arcs[a].head]));
            }
        }
        count[self.root()]
    }

    /// Keeps only the arcs for which `keep` returns `true`, dropping nodes
    /// that no longer lie on an r–t path.
    pub fn retain_arcs(&self, mut keep: impl FnMut(&Arc) -> bool) -> Result<Self> {
        let specs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .filter(|a| keep(a))
            .map(|a| ArcSpec::new(a.tail, a.head, a.value, a.length))
            .collect();
        DecisionDiagram::from_parts(self.num_vars, &self.node_layer, &specs)
    }

    /// Same diagram with arc lengths replaced by `f(arc)`.
    pub fn with_lengths(&self, mut f: impl FnMut(&Arc) -> f64) -> Self {
        let mut dd = self.clone();
        for a in dd.arcs.iter_mut() {
            a.length = f(a);
        }
        dd
    }

    /// Checks the structural invariants. Diagrams built through
    /// [`DecisionDiagram::from_parts`] always pass.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInstance(m));
        if self.layers[0].len() != 1 || self.layers[self.num_vars].len() != 1 {
            return bad("root or terminal layer is not a singleton".into());
        }
        for a in &self.arcs {
            if self.node_layer[a.head] != self.node_layer[a.tail] + 1 {
                return bad(format!("arc {} skips layers", a.id));
            }
        }
        for u in 0..self.num_nodes() {
            if u != self.terminal() && self.out_arcs[u].is_empty() {
                return bad(format!("node {u} is a dead end"));
            }
            if u != self.root() && self.in_arcs[u].is_empty() {
                return bad(format!("node {u} is unreachable"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The knapsack of the running example: max 4x1+3x2+7x3+8x4 with
    /// weights (7,5,4,1) and capacity 8.
    pub fn knapsack_spec() -> KnapsackSpec {
        KnapsackSpec::single(vec![7, 5, 4, 1], 8, vec![4.0, 3.0, 7.0, 8.0])
    }

    pub fn knapsack_reduced() -> DecisionDiagram {
        reduce(&compile(&knapsack_spec(), 4).unwrap())
    }
}
