use super::{CspInstance, ResourceModel};
use crate::dd::{ArcId, DecisionDiagram, PathSolution};
use crate::{Deadline, Error, Result, Sense};

const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelingStats {
    pub created: usize,
    pub kept: usize,
}

struct Entry<L> {
    label: L,
    cost: f64,
    parent: usize,
    arc: ArcId,
}

/// Forward layer-by-layer labeling with dominance: a label survives at a
/// node unless another label there uses no more of every resource at a cost
/// that is no worse.
pub fn solve_labeling(csp: &CspInstance) -> Result<PathSolution> {
    solve_labeling_with(csp.dd, &csp.resources(), csp.sense, Deadline::none()).map(|r| r.0)
}

pub fn solve_labeling_with<R: ResourceModel>(
    dd: &DecisionDiagram,
    model: &R,
    sense: Sense,
    deadline: Deadline,
) -> Result<(PathSolution, LabelingStats)> {
    let sign = sense.sign();
    let mut arena: Vec<Entry<R::Label>> =
        vec![Entry { label: model.root(), cost: 0.0, parent: usize::MAX, arc: usize::MAX }];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); dd.num_nodes()];
    buckets[dd.root()].push(0);
    let mut stats = LabelingStats { created: 1, kept: 1 };

    for layer in dd.layers().iter().take(dd.num_vars()) {
        deadline.check()?;
        for &u in layer {
            let labels = std::mem::take(&mut buckets[u]);
            for &li in &labels {
                for &a in dd.out_arcs(u) {
                    let arc = dd.arc(a);
                    let Some(next) = model.extend(&arena[li].label, arc) else { continue };
                    if !model.can_complete(&next, arc.head) {
                        continue;
                    }
                    stats.created += 1;
                    let cost = arena[li].cost + sign * arc.length;
                    let bucket = &buckets[arc.head];
                    if bucket.iter().any(|&k| {
                        arena[k].cost <= cost + COST_TOL && model.dominates(&arena[k].label, &next)
                    }) {
                        continue;
                    }
                    let keep: Vec<usize> = bucket
                        .iter()
                        .copied()
                        .filter(|&k| {
                            !(cost <= arena[k].cost + COST_TOL
                                && model.dominates(&next, &arena[k].label))
                        })
                        .collect();
                    arena.push(Entry { label: next, cost, parent: li, arc: a });
                    buckets[arc.head] = keep;
                    buckets[arc.head].push(arena.len() - 1);
                    stats.kept += 1;
                }
            }
            buckets[u] = labels;
        }
    }

    let best = buckets[dd.terminal()]
        .iter()
        .copied()
        .min_by(|&a, &b| arena[a].cost.total_cmp(&arena[b].cost).then(a.cmp(&b)))
        .ok_or(Error::NoFeasiblePath)?;
    let mut arcs = Vec::with_capacity(dd.num_vars());
    let mut k = best;
    while arena[k].parent != usize::MAX {
        arcs.push(arena[k].arc);
        k = arena[k].parent;
    }
    arcs.reverse();
    Ok((PathSolution::from_arcs(dd, arcs), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::fixtures::{example2_dd, example2_side};
    use crate::csp::{AdditiveResources, SideConstraints};
    use crate::dd::{extreme_path, Arc};

    #[test]
    fn example2_optimum() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        let sol = solve_labeling(&csp).unwrap();
        assert_eq!(sol.objective, 8.0);
        assert_eq!(sol.values, vec![0, 0, 0, 1]);
    }

    #[test]
    fn zero_budget_forces_zero_path() {
        let dd = example2_dd();
        let side = SideConstraints::single_row(&dd, 0.0, |a| dd.arc(a).value as f64).unwrap();
        let csp = CspInstance::new(&dd, side, Sense::Max).unwrap();
        let sol = solve_labeling(&csp).unwrap();
        assert_eq!((sol.objective, sol.values), (0.0, vec![0, 0, 0, 0]));
    }

    #[test]
    fn no_rows_is_extreme_path() {
        let dd = example2_dd();
        for sense in [Sense::Min, Sense::Max] {
            let csp = CspInstance::unconstrained(&dd, sense);
            assert_eq!(solve_labeling(&csp).unwrap().objective, extreme_path(&dd, sense).objective);
        }
    }

    #[test]
    fn stored_labels_never_exceed_budget() {
        struct Checked<'a>(AdditiveResources<'a>, f64);
        impl ResourceModel for Checked<'_> {
            type Label = Vec<f64>;
            fn root(&self) -> Vec<f64> {
                self.0.root()
            }
            fn extend(&self, l: &Vec<f64>, a: &Arc) -> Option<Vec<f64>> {
                let next = self.0.extend(l, a);
                if let Some(s) = &next {
                    assert!(s[0] <= self.1);
                }
                next
            }
            fn can_complete(&self, l: &Vec<f64>, u: usize) -> bool {
                self.0.can_complete(l, u)
            }
            fn dominates(&self, a: &Vec<f64>, b: &Vec<f64>) -> bool {
                self.0.dominates(a, b)
            }
        }
        let dd = example2_dd();
        let side = example2_side(&dd);
        let model = Checked(AdditiveResources::new(&dd, &side), 7.0);
        let (sol, stats) = solve_labeling_with(&dd, &model, Sense::Max, Deadline::none()).unwrap();
        assert_eq!(sol.objective, 8.0);
        assert!(stats.kept <= stats.created);
    }
}
