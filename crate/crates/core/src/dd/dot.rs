use super::DecisionDiagram;
use std::fmt::Write;

/// Graphviz rendering. Zero-valued arcs are dashed and the rest solid.
/// Binary diagrams label arcs with their length; diagrams with other values
/// use `value:length`.
pub fn export_dot(dd: &DecisionDiagram) -> String {
    let binary = dd.arcs().iter().all(|a| a.value == 0 || a.value == 1);
    let name = |u: usize| {
        if u == dd.root() {
            "r".to_string()
        } else if u == dd.terminal() {
            "t".to_string()
        } else {
            format!("u{u}")
        }
    };
    let mut out = String::from("digraph dd {\n  rankdir=TB;\n");
    for (j, layer) in dd.layers().iter().enumerate() {
        let _ = writeln!(out, "  subgraph layer{j} {{ rank=same;");
        for &u in layer {
            let _ = writeln!(out, "    {};", name(u));
        }
        out.push_str("  }\n");
    }
    for a in dd.arcs() {
        let style = if a.value == 0 { "dashed" } else { "solid" };
        let label = if binary {
            fmt_len(a.length)
        } else {
            format!("{}:{}", a.value, fmt_len(a.length))
        };
        let _ = writeln!(
            out,
            "  {} -> {} [style={style}, label=\"{label}\"];",
            name(a.tail),
            name(a.head)
        );
    }
    out.push_str("}\n");
    out
}

fn fmt_len(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
