use crate::csp::SideConstraints;
use crate::dd::{ArcId, DecisionDiagram};
use crate::Result;

/// Robust rows `A(δ) x ≤ b(δ)` over a finite scenario list, written on the
/// arcs of a diagram as `g_{i,a}(δ) = v_a · a_{i, layer(a)}(δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustConstraintView {
    /// Per scenario, `(row, arc, g)` triplets with nonzero `g`.
    pub coefficients: Vec<Vec<(usize, ArcId, f64)>>,
    pub rhs: Vec<Vec<f64>>,
}

impl RobustConstraintView {
    /// `scenarios[k] = (A(δ_k), b(δ_k))` with `A` given row by row over the
    /// diagram's variables.
    pub fn new(dd: &DecisionDiagram, scenarios: &[(Vec<Vec<f64>>, Vec<f64>)]) -> Self {
        let mut coefficients = Vec::with_capacity(scenarios.len());
        let mut rhs = Vec::with_capacity(scenarios.len());
        for (a, b) in scenarios {
            let mut g = Vec::new();
            for (i, row) in a.iter().enumerate() {
                for arc in dd.arcs() {
                    let v = arc.value as f64 * row[dd.arc_layer(arc.id)];
                    if v != 0.0 {
                        g.push((i, arc.id, v));
                    }
                }
            }
            coefficients.push(g);
            rhs.push(b.clone());
        }
        RobustConstraintView { coefficients, rhs }
    }

    pub fn num_scenarios(&self) -> usize {
        self.rhs.len()
    }

    /// Whether a path meets every row of every scenario.
    pub fn admits(&self, arcs: &[ArcId]) -> bool {
        let mut on = std::collections::HashSet::new();
        on.extend(arcs.iter().copied());
        self.coefficients.iter().zip(&self.rhs).all(|(g, b)| {
            let mut lhs = vec![0.0; b.len()];
            for &(i, a, v) in g {
                if on.contains(&a) {
                    lhs[i] += v;
                }
            }
            lhs.iter().zip(b).all(|(l, r)| *l <= r + 1e-9)
        })
    }

    /// All scenarios stacked into one side-constraint system; fails unless
    /// every coefficient and right-hand side is non-negative.
    pub fn side_constraints(&self, dd: &DecisionDiagram) -> Result<SideConstraints> {
        let mut entries = Vec::new();
        let mut d = Vec::new();
        for (g, b) in self.coefficients.iter().zip(&self.rhs) {
            let base = d.len();
            entries.extend(g.iter().map(|&(i, a, v)| (base + i, a, v)));
            d.extend_from_slice(b);
        }
        SideConstraints::new(dd.num_arcs(), entries, d)
    }
}
