use super::CspInstance;
use crate::dd::{enumerate_paths, PathSolution};
use crate::{Error, Result};

/// Best path among those whose resource use fits the budget, by full
/// enumeration. The first path found wins ties.
pub fn brute_force_csp(csp: &CspInstance) -> Result<PathSolution> {
    let mut best: Option<PathSolution> = None;
    for p in enumerate_paths(csp.dd, None)? {
        if !csp.side.admits(&p.arcs) {
            continue;
        }
        if best.as_ref().is_none_or(|b| csp.sense.better(p.objective, b.objective)) {
            best = Some(p);
        }
    }
    best.ok_or(Error::NoFeasiblePath)
}
