use super::CspInstance;
use crate::milp::{LpModel, RowSense};

/// Arc-flow model: one binary `y_a` per arc, a unit of flow out of the root,
/// conservation at every interior node, and the side rows.
pub fn build_flow_milp(csp: &CspInstance) -> LpModel {
    let dd = csp.dd;
    let mut model = LpModel::new(csp.sense);
    let y: Vec<usize> = (0..dd.num_arcs()).map(|a| model.add_binary(format!("y_{a}"))).collect();

    let root_out = dd.out_arcs(dd.root()).iter().map(|&a| (y[a], 1.0)).collect();
    model.add_constraint("source", root_out, RowSense::Eq, 1.0);
    for u in 0..dd.num_nodes() {
        if u == dd.root() || u == dd.terminal() {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = dd.in_arcs(u).iter().map(|&a| (y[a], 1.0)).collect();
        terms.extend(dd.out_arcs(u).iter().map(|&a| (y[a], -1.0)));
        model.add_constraint(format!("balance_{u}"), terms, RowSense::Eq, 0.0);
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); csp.side.num_rows()];
    for a in 0..dd.num_arcs() {
        for &(i, g) in csp.side.column(a) {
            rows[i].push((y[a], g));
        }
    }
    for (i, terms) in rows.into_iter().enumerate() {
        model.add_constraint(format!("side_{i}"), terms, RowSense::Le, csp.side.budget()[i]);
    }
    model.set_objective(dd.arcs().iter().map(|a| (y[a.id], a.length)).collect());
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::fixtures::{example2_dd, example2_side};
    use crate::dd::extreme_path;
    use crate::milp::{solve_lp, solve_milp, write_lp_file};
    use crate::Sense;

    #[test]
    fn example2_model_shape_and_optimum() {
        let dd = example2_dd();
        let csp = CspInstance::new(&dd, example2_side(&dd), Sense::Max).unwrap();
        let m = build_flow_milp(&csp);
        assert_eq!((m.num_binaries(), m.num_cons()), (10, 7));
        let text = write_lp_file(&m);
        let binaries = text.split("Binaries\n").nth(1).unwrap().split("End").next().unwrap();
        assert_eq!(binaries.split_whitespace().count(), 10);
        let s = solve_milp(&m).unwrap();
        assert_eq!(s.objective, 8.0);
    }

    #[test]
    fn unconstrained_relaxation_is_integral() {
        let dd = example2_dd();
        let csp = CspInstance::unconstrained(&dd, Sense::Max);
        let s = solve_lp(&build_flow_milp(&csp)).unwrap();
        assert!((s.objective - extreme_path(&dd, Sense::Max).objective).abs() < 1e-9);
        assert!(s.x.iter().all(|v| v.abs() < 1e-9 || (v - 1.0).abs() < 1e-9));
    }
}
