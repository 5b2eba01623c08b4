use super::simplex::Tableau;
use super::{LpModel, LpSolution, LpStatus, SolverOptions};
use crate::Result;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Node {
    bound: f64,
    seq: u64,
    fixes: Vec<(usize, bool)>,
}

// Min-heap on (bound, seq): best bound first, oldest first among ties. The
// search dives into one child of every branched node before returning to
// the heap, which keeps consecutive warm starts close.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

struct Search {
    opts: SolverOptions,
    tab: Tableau,
    bins: Vec<usize>,
    base: Vec<(f64, f64)>,
    priority: Vec<i32>,
}

impl Search {
    fn apply(&mut self, fixes: &[(usize, bool)]) {
        for (k, &j) in self.bins.iter().enumerate() {
            let (l, u) = self.base[k];
            self.tab.set_bounds(j, l, u);
        }
        for &(j, one) in fixes {
            let v = if one { 1.0 } else { 0.0 };
            self.tab.set_bounds(j, v, v);
        }
    }

    fn resolve(&mut self) -> Result<LpStatus> {
        match self.tab.warm_resolve()? {
            Some(s) => Ok(s),
            None => self.tab.solve_from_scratch(),
        }
    }

    /// Most fractional binary of the highest priority, ties to the lowest
    /// index.
    fn branch_var(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(i32, f64, usize)> = None;
        for (k, &j) in self.bins.iter().enumerate() {
            let frac = (x[j] - x[j].round()).abs();
            if frac <= self.opts.int_tol {
                continue;
            }
            let p = self.priority[k];
            if best.is_none_or(|(bp, bf, _)| p > bp || (p == bp && frac > bf)) {
                best = Some((p, frac, j));
            }
        }
        best.map(|b| b.2)
    }

    /// Binary farthest from integrality, ignoring the tolerance.
    fn least_integral(&self, x: &[f64]) -> Option<usize> {
        self.bins
            .iter()
            .map(|&j| (j, (x[j] - x[j].round()).abs()))
            .filter(|&(_, f)| f > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(j, _)| j)
    }

    /// Re-solves with every binary fixed at its rounded value so that the
    /// continuous part is consistent with an exactly integral point.
    fn polish(&mut self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let fixes: Vec<(usize, bool)> = self.bins.iter().map(|&j| (j, x[j] > 0.5)).collect();
        self.apply(&fixes);
        if self.resolve()? != LpStatus::Optimal {
            return Ok(None);
        }
        let mut p = self.tab.primal();
        for &(j, one) in &fixes {
            p[j] = if one { 1.0 } else { 0.0 };
        }
        Ok(Some(p))
    }
}

pub fn solve_milp_with(model: &LpModel, opts: &SolverOptions) -> Result<LpSolution> {
    model.validate()?;
    let bins: Vec<usize> = (0..model.num_vars()).filter(|&j| model.vars[j].binary).collect();
    let base = bins.iter().map(|&j| (model.vars[j].lb, model.vars[j].ub)).collect();
    let priority = bins.iter().map(|&j| model.vars[j].priority).collect();
    let mut s = Search { opts: *opts, tab: Tableau::new(model, opts), bins, base, priority };
    let sign = model.sense.sign();

    let root = s.tab.solve_from_scratch()?;
    let mut out = LpSolution::with_status(root);
    if root != LpStatus::Optimal {
        out.iterations = s.tab.iterations;
        out.nodes = 1;
        return Ok(out);
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0usize;
    let mut pending: Option<Node> = Some(Node { bound: f64::NEG_INFINITY, seq, fixes: Vec::new() });
    let mut first = true;

    loop {
        let node = match pending.take().or_else(|| heap.pop()) {
            Some(n) => n,
            None => break,
        };
        let cutoff = |inc: &Option<(f64, Vec<f64>)>, z: f64| match inc {
            Some((best, _)) => z >= best - 1e-9 * best.abs().max(1.0),
            None => false,
        };
        if cutoff(&incumbent, node.bound) {
            continue;
        }
        if nodes >= opts.max_nodes {
            out.status = LpStatus::CapExceeded;
            break;
        }
        nodes += 1;
        opts.deadline.check()?;

        let status = if first {
            first = false;
            LpStatus::Optimal
        } else {
            s.apply(&node.fixes);
            s.resolve()?
        };
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if incumbent.is_none() && node.fixes.is_empty() {
                    out.status = LpStatus::Unbounded;
                    break;
                }
                continue;
            }
            LpStatus::CapExceeded => {
                out.status = LpStatus::CapExceeded;
                break;
            }
        }
        let z = s.tab.internal_objective();
        if cutoff(&incumbent, z) {
            continue;
        }
        let x = s.tab.primal();
        let branch = match s.branch_var(&x) {
            Some(j) => Some(j),
            None => match s.polish(&x)? {
                Some(p) => {
                    let zp = sign * model.objective_value(&p);
                    if incumbent.as_ref().is_none_or(|(best, _)| zp < *best) {
                        incumbent = Some((zp, p));
                    }
                    None
                }
                // integral only within the tolerance, and rounding breaks a row
                None => s.least_integral(&x),
            },
        };
        if let Some(j) = branch {
            // dive into the child on the rounding side, queue the other
            let near = x[j] >= 0.5;
            for one in [false, true] {
                seq += 1;
                let mut fixes = node.fixes.clone();
                fixes.push((j, one));
                let child = Node { bound: z, seq, fixes };
                if one == near {
                    pending = Some(child);
                } else {
                    heap.push(child);
                }
            }
        }
    }

    out.iterations = s.tab.iterations;
    out.nodes = nodes;
    match incumbent {
        Some((_, x)) => {
            if out.status != LpStatus::CapExceeded {
                out.status = LpStatus::Optimal;
            }
            out.objective = model.objective_value(&x);
            out.x = x;
        }
        None => {
            if out.status == LpStatus::Optimal {
                out.status = LpStatus::Infeasible;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_milp, RowSense};
    use crate::Sense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn knapsack(weights: &[f64], cap: f64, profits: &[f64]) -> LpModel {
        let mut m = LpModel::new(Sense::Max);
        let xs: Vec<usize> = (0..weights.len()).map(|j| m.add_binary(format!("x{j}"))).collect();
        m.add_constraint("cap", xs.iter().zip(weights).map(|(&j, &w)| (j, w)).collect(), RowSense::Le, cap);
        m.set_objective(xs.iter().zip(profits).map(|(&j, &p)| (j, p)).collect());
        m
    }

    #[test]
    fn running_example_knapsack() {
        let m = knapsack(&[7.0, 5.0, 4.0, 1.0], 8.0, &[4.0, 3.0, 7.0, 8.0]);
        let s = solve_milp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 15.0);
        assert_eq!(s.x, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn fixed_binaries_reduce_to_lp() {
        let mut m = knapsack(&[2.0, 3.0], 4.0, &[1.0, 1.0]);
        m.vars[0].lb = 1.0;
        m.vars[1].ub = 0.0;
        let s = solve_milp(&m).unwrap();
        assert_eq!(s.x, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_milp() {
        let mut m = LpModel::new(Sense::Min);
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        m.add_constraint("c", vec![(x, 2.0), (y, 2.0)], RowSense::Eq, 1.0);
        assert_eq!(solve_milp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn random_knapsacks_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=12);
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1..30) as f64).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(1..30) as f64).collect();
            let cap = (w.iter().sum::<f64>() * rng.gen_range(0.2..0.8)).floor();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let (mut ww, mut pp) = (0.0, 0.0);
                for j in 0..n {
                    if mask >> j & 1 == 1 {
                        ww += w[j];
                        pp += p[j];
                    }
                }
                if ww <= cap {
                    best = best.max(pp);
                }
            }
            let s = solve_milp(&knapsack(&w, cap, &p)).unwrap();
            assert_eq!(s.objective, best);
            assert!(s.x.iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn mixed_continuous_part_is_consistent() {
        // max 5z - y, z <= 10 y, y binary, z in [0, 7.5]
        let mut m = LpModel::new(Sense::Max);
        let y = m.add_binary("y");
        let z = m.add_var("z", 0.0, 7.5);
        m.add_constraint("link", vec![(z, 1.0), (y, -10.0)], RowSense::Le, 0.0);
        m.set_objective(vec![(z, 5.0), (y, -1.0)]);
        let s = solve_milp(&m).unwrap();
        assert_eq!(s.x, vec![1.0, 7.5]);
        assert!(m.max_violation(&s.x) <= 1e-9);
    }

    #[test]
    fn nearly_integral_binary_is_still_branched() {
        // the LP sets v = 148 / 148.0001, and v = 1 breaks the link row
        let mut m = LpModel::new(Sense::Max);
        let v = m.add_binary("v");
        let w = m.add_var("w", 0.0, 148.0);
        m.add_constraint("link", vec![(w, 1.0), (v, -148.0001)], RowSense::Ge, 0.0);
        m.set_objective(vec![(v, 1.0)]);
        let s = solve_milp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x[0], 0.0);
        assert!(m.max_violation(&s.x) <= 1e-9);
    }
}
