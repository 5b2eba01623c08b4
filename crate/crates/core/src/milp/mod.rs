//! A small LP/MILP engine: bounded dense-tableau simplex, binary
//! branch-and-bound and CPLEX LP file input/output.
//!
//! Duals are reported as `∂ objective / ∂ rhs` in the model's own sense, so a
//! binding `≤` row of a maximization problem has a non-negative dual. Reduced
//! costs follow the same convention: `c_j − Σ_i a_ij y_i`.

mod bb;
mod lp_format;
mod simplex;

pub use bb::solve_milp_with;
pub use lp_format::{parse_lp_file, write_lp_file};
pub use simplex::MAX_TABLEAU_ENTRIES;

use crate::{Deadline, Error, Result, Sense};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub binary: bool,
    /// Branch-and-bound branches on fractional binaries of the highest
    /// priority first. Not carried by LP files.
    pub priority: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub cons: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    index: HashMap<String, usize>,
    con_index: HashMap<String, usize>,
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel {
            sense,
            vars: Vec::new(),
            cons: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
            con_index: HashMap::new(),
        }
    }

    /// Adds a continuous variable. Panics on a duplicate name.
    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> usize {
        self.push_var(name.into(), lb, ub, false)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.push_var(name.into(), 0.0, 1.0, true)
    }

    fn push_var(&mut self, name: String, lb: f64, ub: f64, binary: bool) -> usize {
        let j = self.vars.len();
        let prev = self.index.insert(name.clone(), j);
        assert!(prev.is_none(), "duplicate variable name {name}");
        self.vars.push(Variable { name, lb, ub, binary, priority: 0 });
        j
    }

    /// Adds a row. Repeated variables in `terms` are summed. Panics on a
    /// duplicate name.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        let name = name.into();
        let i = self.cons.len();
        let prev = self.con_index.insert(name.clone(), i);
        assert!(prev.is_none(), "duplicate constraint name {name}");
        self.cons.push(Constraint { name, terms: merge_terms(terms), sense, rhs });
        i
    }

    pub fn set_priority(&mut self, j: usize, priority: i32) {
        self.vars[j].priority = priority;
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) {
        self.objective = merge_terms(terms);
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn con(&self, name: &str) -> Option<usize> {
        self.con_index.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_cons(&self) -> usize {
        self.cons.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.binary).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.cons.iter().map(|c| c.violation(x));
        let bounds = self.vars.iter().zip(x).map(|(v, &xj)| (v.lb - xj).max(xj - v.ub).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Equality up to the order of the variables. Parsed LP files number
    /// variables by first appearance, so this is the round-trip notion.
    pub fn same_as(&self, other: &LpModel) -> bool {
        let named = |m: &LpModel, terms: &[(usize, f64)]| {
            let mut v: Vec<(String, u64)> =
                terms.iter().map(|&(j, a)| (m.vars[j].name.clone(), a.to_bits())).collect();
            v.sort();
            v
        };
        let mut va: Vec<_> = self.vars.iter().map(|v| (&v.name, v.lb.to_bits(), v.ub.to_bits(), v.binary)).collect();
        let mut vb: Vec<_> = other.vars.iter().map(|v| (&v.name, v.lb.to_bits(), v.ub.to_bits(), v.binary)).collect();
        va.sort();
        vb.sort();
        self.sense == other.sense
            && va == vb
            && named(self, &self.objective) == named(other, &other.objective)
            && self.cons.len() == other.cons.len()
            && self.cons.iter().zip(&other.cons).all(|(a, b)| {
                a.name == b.name
                    && a.sense == b.sense
                    && a.rhs.to_bits() == b.rhs.to_bits()
                    && named(self, &a.terms) == named(other, &b.terms)
            })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        for v in &self.vars {
            if !valid_name(&v.name) {
                return bad(format!("invalid variable name {:?}", v.name));
            }
            if v.lb.is_nan() || v.ub.is_nan() || v.lb > v.ub {
                return bad(format!("inconsistent bounds on {}", v.name));
            }
            if v.binary && (v.lb < 0.0 || v.ub > 1.0) {
                return bad(format!("binary {} has bounds outside [0,1]", v.name));
            }
        }
        for c in &self.cons {
            if !valid_name(&c.name) {
                return bad(format!("invalid constraint name {:?}", c.name));
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|&(j, a)| j >= self.vars.len() || !a.is_finite()) {
                return bad(format!("malformed row {}", c.name));
            }
        }
        if self.objective.iter().any(|&(j, c)| j >= self.vars.len() || !c.is_finite()) {
            return bad("malformed objective".into());
        }
        Ok(())
    }
}

fn merge_terms(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (j, a) in terms {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

pub(crate) fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name.len() <= 255 && chars.all(|c| c.is_ascii_alphanumeric() || "_.[]#".contains(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    CapExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Per-row duals; empty for MILP solves.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub nodes: usize,
}

impl LpSolution {
    pub(crate) fn with_status(status: LpStatus) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            iterations: 0,
            nodes: 0,
        }
    }

    /// Maps a non-optimal status to the matching error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::CapExceeded => Err(Error::CapExceeded(format!(
                "solver cap hit after {} iterations / {} nodes",
                self.iterations, self.nodes
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub int_tol: f64,
    pub max_iters: usize,
    pub max_nodes: usize,
    pub deadline: Deadline,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-7,
            int_tol: 1e-6,
            max_iters: 1_000_000,
            max_nodes: 1_000_000,
            deadline: Deadline::none(),
        }
    }
}

/// Solves the LP relaxation (binaries relaxed to their bounds).
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    solve_lp_with(model, &SolverOptions::default())
}

pub fn solve_lp_with(model: &LpModel, opts: &SolverOptions) -> Result<LpSolution> {
    model.validate()?;
    let mut tab = simplex::Tableau::new(model, opts);
    let status = tab.solve_from_scratch()?;
    let mut sol = LpSolution::with_status(status);
    sol.iterations = tab.iterations;
    if status == LpStatus::Optimal {
        tab.refresh();
        sol.x = tab.primal();
        sol.duals = tab.duals();
        sol.reduced_costs = tab.reduced_costs();
        sol.objective = model.objective_value(&sol.x);
    }
    Ok(sol)
}

/// Exact optimum over the binaries by best-bound branch-and-bound with
/// diving.
pub fn solve_milp(model: &LpModel) -> Result<LpSolution> {
    solve_milp_with(model, &SolverOptions::default())
}
