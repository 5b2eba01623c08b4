use super::{ArcId, DecisionDiagram, NodeId, PathSolution};
use crate::{Error, Result, Sense};

pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// Shortest (`Min`) or longest (`Max`) r–t path by backward dynamic
/// programming. Among equally good arcs the one with the smallest id wins.
pub fn extreme_path(dd: &DecisionDiagram, sense: Sense) -> PathSolution {
    let sign = sense.sign();
    let mut best = vec![f64::INFINITY; dd.num_nodes()];
    let mut choice: Vec<Option<ArcId>> = vec![None; dd.num_nodes()];
    best[dd.terminal()] = 0.0;
    for layer in dd.layers().iter().rev().skip(1) {
        for &u in layer {
            for &a in dd.out_arcs(u) {
                let arc = dd.arc(a);
                let cand = sign * arc.length + best[arc.head];
                if cand < best[u] {
                    best[u] = cand;
                    choice[u] = Some(a);
                }
            }
        }
    }
    let mut arcs = Vec::with_capacity(dd.num_vars());
    let mut u = dd.root();
    while let Some(a) = choice[u] {
        arcs.push(a);
        u = dd.arc(a).head;
    }
    PathSolution::from_arcs(dd, arcs)
}

/// Depth-first iterator over every r–t path, in lexicographic arc-id order.
///
/// Fails up front with `PathCapExceeded` if the diagram has more than `cap`
/// paths (default [`DEFAULT_PATH_CAP`]).
pub fn enumerate_paths(dd: &DecisionDiagram, cap: Option<u128>) -> Result<PathIter<'_>> {
    let cap = cap.unwrap_or(DEFAULT_PATH_CAP);
    if dd.count_paths() > cap {
        return Err(Error::PathCapExceeded { cap });
    }
    Ok(PathIter { dd, stack: vec![(dd.root(), 0)], arcs: Vec::new(), done: false })
}

pub struct PathIter<'a> {
    dd: &'a DecisionDiagram,
    // (node, index of the next out-arc to try)
    stack: Vec<(NodeId, usize)>,
    arcs: Vec<ArcId>,
    done: bool,
}

impl Iterator for PathIter<'_> {
    type Item = PathSolution;

    fn next(&mut self) -> Option<PathSolution> {
        if self.done {
            return None;
        }
        while let Some(&mut (u, ref mut k)) = self.stack.last_mut() {
            if u == self.dd.terminal() {
                let sol = PathSolution::from_arcs(self.dd, self.arcs.clone());
                self.stack.pop();
                self.arcs.pop();
                return Some(sol);
            }
            let out = self.dd.out_arcs(u);
            if *k < out.len() {
                let a = out[*k];
                *k += 1;
                self.arcs.push(a);
                self.stack.push((self.dd.arc(a).head, 0));
            } else {
                self.stack.pop();
                self.arcs.pop();
            }
        }
        self.done = true;
        None
    }
}
