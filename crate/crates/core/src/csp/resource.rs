use super::{SideConstraints, RESOURCE_TOL};
use crate::dd::{Arc, DecisionDiagram, NodeId};

/// Resource bookkeeping along a partial path, shared by the labeling and
/// pulse solvers.
pub trait ResourceModel {
    type Label: Clone;

    fn root(&self) -> Self::Label;

    /// Label after traversing `arc`, or `None` if that breaks a limit.
    fn extend(&self, label: &Self::Label, arc: &Arc) -> Option<Self::Label>;

    /// `false` if no completion from `node` can stay feasible.
    fn can_complete(&self, _label: &Self::Label, _node: NodeId) -> bool {
        true
    }

    /// `a` is at least as good as `b` in every resource.
    fn dominates(&self, a: &Self::Label, b: &Self::Label) -> bool;
}

/// No resources: every path is feasible.
pub struct Unconstrained;

impl ResourceModel for Unconstrained {
    type Label = ();

    fn root(&self) {}

    fn extend(&self, _: &(), _: &Arc) -> Option<()> {
        Some(())
    }

    fn dominates(&self, _: &(), _: &()) -> bool {
        true
    }
}

/// Additive resources `s ← s + G_a` with budget `d`.
pub struct AdditiveResources<'a> {
    side: &'a SideConstraints,
    // min_rest[u][i]: least amount of resource i any u–t path consumes
    min_rest: Vec<Vec<f64>>,
}

impl<'a> AdditiveResources<'a> {
    pub fn new(dd: &DecisionDiagram, side: &'a SideConstraints) -> Self {
        let m = side.num_rows();
        let mut min_rest = vec![vec![f64::INFINITY; m]; dd.num_nodes()];
        min_rest[dd.terminal()] = vec![0.0; m];
        for layer in dd.layers().iter().rev().skip(1) {
            for &u in layer {
                for &a in dd.out_arcs(u) {
                    let head = dd.arc(a).head;
                    let mut use_a = min_rest[head].clone();
                    for &(i, g) in side.column(a) {
                        use_a[i] += g;
                    }
                    for i in 0..m {
                        min_rest[u][i] = min_rest[u][i].min(use_a[i]);
                    }
                }
            }
        }
        AdditiveResources { side, min_rest }
    }

    pub fn min_rest(&self, u: NodeId) -> &[f64] {
        &self.min_rest[u]
    }
}

impl ResourceModel for AdditiveResources<'_> {
    type Label = Vec<f64>;

    fn root(&self) -> Vec<f64> {
        vec![0.0; self.side.num_rows()]
    }

    fn extend(&self, label: &Vec<f64>, arc: &Arc) -> Option<Vec<f64>> {
        let mut s = label.clone();
        for &(i, g) in self.side.column(arc.id) {
            s[i] += g;
            if s[i] > self.side.budget()[i] + RESOURCE_TOL {
                return None;
            }
        }
        Some(s)
    }

    fn can_complete(&self, label: &Vec<f64>, node: NodeId) -> bool {
        let d = self.side.budget();
        label.iter().zip(&self.min_rest[node]).zip(d).all(|((s, r), d)| s + r <= d + RESOURCE_TOL)
    }

    fn dominates(&self, a: &Vec<f64>, b: &Vec<f64>) -> bool {
        a.iter().zip(b).all(|(x, y)| *x <= y + RESOURCE_TOL)
    }
}
