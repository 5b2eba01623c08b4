//! Constrained shortest/longest paths over a decision diagram.
//!
//! A path is feasible when the resources it consumes, `Σ_a G_a`, stay within
//! the budget `d`. Because `G ≥ 0`, every prefix of a feasible path is itself
//! within budget, which is what makes label pruning valid.

mod brute;
mod flow;
mod labeling;
mod pulse;
mod resource;
mod state_graph;

pub use brute::brute_force_csp;
pub use flow::build_flow_milp;
pub use labeling::{solve_labeling, solve_labeling_with, LabelingStats};
pub use pulse::{solve_pulse, solve_pulse_with, PulseConfig, PulseStats};
pub use resource::{AdditiveResources, ResourceModel, Unconstrained};
pub use state_graph::{expand_state_graph, StateGraph, DEFAULT_STATE_CAP};

use crate::dd::{ArcId, DecisionDiagram};
use crate::{Error, Result, Sense};

/// Absolute tolerance for resource comparisons.
pub const RESOURCE_TOL: f64 = 1e-9;

/// Sparse non-negative rows `G y ≤ d` over the arcs of one diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct SideConstraints {
    d: Vec<f64>,
    entries: Vec<(usize, ArcId, f64)>,
    columns: Vec<Vec<(usize, f64)>>,
}

impl SideConstraints {
    /// `entries` are `(row, arc, coefficient)` triplets; duplicates add up.
    pub fn new(num_arcs: usize, entries: Vec<(usize, ArcId, f64)>, d: Vec<f64>) -> Result<Self> {
        if let Some(&di) = d.iter().find(|&&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInstance(format!("budget {di} is not a non-negative number")));
        }
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_arcs];
        for &(i, a, g) in &entries {
            if i >= d.len() || a >= num_arcs {
                return Err(Error::InvalidInstance(format!("entry ({i}, {a}) out of range")));
            }
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidInstance(format!("coefficient {g} is negative")));
            }
            match columns[a].iter_mut().find(|e| e.0 == i) {
                Some(e) => e.1 += g,
                None => columns[a].push((i, g)),
            }
        }
        for col in &mut columns {
            col.retain(|e| e.1 != 0.0);
            col.sort_by_key(|e| e.0);
        }
        Ok(SideConstraints { d, entries, columns })
    }

    /// No side rows at all.
    pub fn none(num_arcs: usize) -> Self {
        SideConstraints { d: Vec::new(), entries: Vec::new(), columns: vec![Vec::new(); num_arcs] }
    }

    /// One row whose coefficient on arc `a` is `coef(a)`.
    pub fn single_row(dd: &DecisionDiagram, d: f64, mut coef: impl FnMut(ArcId) -> f64) -> Result<Self> {
        let entries = (0..dd.num_arcs()).map(|a| (0, a, coef(a))).filter(|e| e.2 != 0.0).collect();
        Self::new(dd.num_arcs(), entries, vec![d])
    }

    pub fn num_rows(&self) -> usize {
        self.d.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.columns.len()
    }

    pub fn budget(&self) -> &[f64] {
        &self.d
    }

    pub fn entries(&self) -> &[(usize, ArcId, f64)] {
        &self.entries
    }

    pub fn column(&self, a: ArcId) -> &[(usize, f64)] {
        &self.columns[a]
    }

    /// Resource use of a set of arcs.
    pub fn usage(&self, arcs: &[ArcId]) -> Vec<f64> {
        let mut s = vec![0.0; self.num_rows()];
        for &a in arcs {
            for &(i, g) in &self.columns[a] {
                s[i] += g;
            }
        }
        s
    }

    pub fn admits(&self, arcs: &[ArcId]) -> bool {
        self.usage(arcs).iter().zip(&self.d).all(|(s, d)| *s <= d + RESOURCE_TOL)
    }
}

#[derive(Debug, Clone)]
pub struct CspInstance<'a> {
    pub dd: &'a DecisionDiagram,
    pub side: SideConstraints,
    pub sense: Sense,
}

impl<'a> CspInstance<'a> {
    pub fn new(dd: &'a DecisionDiagram, side: SideConstraints, sense: Sense) -> Result<Self> {
        if side.num_arcs() != dd.num_arcs() {
            return Err(Error::InvalidInstance(format!(
                "side constraints cover {} arcs, diagram has {}",
                side.num_arcs(),
                dd.num_arcs()
            )));
        }
        Ok(CspInstance { dd, side, sense })
    }

    pub fn unconstrained(dd: &'a DecisionDiagram, sense: Sense) -> Self {
        CspInstance { dd, side: SideConstraints::none(dd.num_arcs()), sense }
    }

    pub fn resources(&self) -> AdditiveResources<'_> {
        AdditiveResources::new(self.dd, &self.side)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::dd::fixtures::knapsack_reduced;

    /// The running example with side row 5x1 + 2x2 + 2x3 + 7x4 ≤ 7.
    pub fn example2_side(dd: &DecisionDiagram) -> SideConstraints {
        let g = [5.0, 2.0, 2.0, 7.0];
        SideConstraints::single_row(dd, 7.0, |a| {
            let arc = dd.arc(a);
            if arc.value == 1 { g[dd.arc_layer(a)] } else { 0.0 }
        })
        .unwrap()
    }

    pub fn example2_dd() -> DecisionDiagram {
        knapsack_reduced()
    }
}
