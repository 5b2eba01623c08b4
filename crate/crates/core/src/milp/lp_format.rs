//! CPLEX LP format, restricted to what [`LpModel`] can express.

use super::{valid_name, LpModel, RowSense};
use crate::{Error, Result, Sense};
use std::collections::HashSet;
use std::fmt::Write;

const LINE_WIDTH: usize = 78;

pub fn write_lp_file(model: &LpModel) -> String {
    let mut out = String::new();
    out.push_str(match model.sense {
        Sense::Min => "Minimize\n",
        Sense::Max => "Maximize\n",
    });
    write_expr(&mut out, model, "obj", &model.objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &model.cons {
        write_expr(&mut out, model, &c.name, &c.terms);
        let op = match c.sense {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }

    out.push_str("Bounds\n");
    for v in &model.vars {
        let default = if v.binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        if (v.lb, v.ub) == default {
            continue;
        }
        if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lb), v.name, num(v.ub));
        }
    }

    let bins: Vec<&str> = model.vars.iter().filter(|v| v.binary).map(|v| v.name.as_str()).collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        let mut line = String::new();
        for b in bins {
            if line.len() + b.len() + 1 > LINE_WIDTH {
                let _ = writeln!(out, "{line}");
                line.clear();
            }
            line.push(' ');
            line.push_str(b);
        }
        let _ = writeln!(out, "{line}");
    }
    out.push_str("End\n");
    out
}

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, model: &LpModel, label: &str, terms: &[(usize, f64)]) {
    let mut line = format!(" {label}:");
    let mut push = |line: &mut String, tok: String| {
        if line.len() + tok.len() + 1 > LINE_WIDTH {
            let _ = writeln!(out, "{line}");
            line.clear();
            line.push_str("   ");
        }
        line.push(' ');
        line.push_str(&tok);
    };
    if terms.is_empty() {
        if let Some(v) = model.vars.first() {
            push(&mut line, format!("0 {}", v.name));
        }
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        let name = &model.vars[j].name;
        let sign = if a < 0.0 { "-" } else { "+" };
        let tok = if k == 0 && a >= 0.0 {
            format!("{} {name}", num(a))
        } else {
            format!("{sign} {} {name}", num(a.abs()))
        };
        push(&mut line, tok);
    }
    out.push_str(&line);
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

/// Parses LP text of the shape produced by [`write_lp_file`]: every token
/// separated by whitespace, objective and rows labelled.
pub fn parse_lp_file(text: &str) -> Result<LpModel> {
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut sense = None;
    let mut section = None;
    // (line, tokens) per statement; rows may span lines
    let mut objective: Vec<String> = Vec::new();
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut bounds: Vec<(usize, Vec<String>)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let header = line.to_ascii_lowercase();
        let new_section = match header.as_str() {
            "minimize" | "minimum" | "min" => {
                sense = Some(Sense::Min);
                Some(Section::Objective)
            }
            "maximize" | "maximum" | "max" => {
                sense = Some(Sense::Max);
                Some(Section::Objective)
            }
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = new_section {
            section = Some(s);
            continue;
        }
        let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        match section {
            None => return Err(err(line_no, "content before the objective section")),
            Some(Section::Objective) => objective.extend(toks),
            Some(Section::Constraints) => {
                if toks[0].ends_with(':') || rows.is_empty() {
                    rows.push((line_no, toks));
                } else {
                    rows.last_mut().unwrap().1.extend(toks);
                }
            }
            Some(Section::Bounds) => bounds.push((line_no, toks)),
            Some(Section::Binaries) => binaries.extend(toks),
            Some(Section::End) => return Err(err(line_no, "content after End")),
        }
    }
    let sense = sense.ok_or_else(|| err(0, "missing objective section"))?;

    // Variables are created in order of first appearance.
    let mut model = LpModel::new(sense);
    let declare = |model: &mut LpModel, name: &str, line: usize| -> Result<usize> {
        if let Some(j) = model.var(name) {
            return Ok(j);
        }
        if !valid_name(name) {
            return Err(err(line, &format!("invalid name {name:?}")));
        }
        Ok(model.add_var(name, 0.0, f64::INFINITY))
    };

    let obj_terms = parse_terms(strip_label(&objective).1, 0)?;
    let mut obj = Vec::new();
    for (name, a) in obj_terms {
        obj.push((declare(&mut model, &name, 0)?, a));
    }
    // The writer pads an empty objective with a single zero term.
    obj.retain(|t| t.1 != 0.0);

    let mut seen = HashSet::new();
    let mut cons = Vec::new();
    for (line, toks) in &rows {
        let (label, rest) = strip_label(toks);
        let label = label.ok_or_else(|| err(*line, "unlabelled row"))?;
        if !seen.insert(label.clone()) {
            return Err(err(*line, "duplicate row name"));
        }
        let op_at = rest
            .iter()
            .position(|t| matches!(t.as_str(), "<=" | "=<" | ">=" | "=>" | "=" | "<" | ">"))
            .ok_or_else(|| err(*line, "row without a comparison"))?;
        let sense = match rest[op_at].as_str() {
            "<=" | "=<" | "<" => RowSense::Le,
            ">=" | "=>" | ">" => RowSense::Ge,
            _ => RowSense::Eq,
        };
        if rest.len() != op_at + 2 {
            return Err(err(*line, "expected a single right-hand side"));
        }
        let rhs = parse_num(&rest[op_at + 1]).ok_or_else(|| err(*line, "bad right-hand side"))?;
        let mut terms = Vec::new();
        for (name, a) in parse_terms(&rest[..op_at], *line)? {
            terms.push((declare(&mut model, &name, *line)?, a));
        }
        cons.push((label, terms, sense, rhs));
    }

    let mut explicit = HashSet::new();
    for (line, toks) in &bounds {
        let t: Vec<&str> = toks.iter().map(String::as_str).collect();
        let (name, lb, ub) = match t.as_slice() {
            [name, free] if free.eq_ignore_ascii_case("free") => {
                (*name, f64::NEG_INFINITY, f64::INFINITY)
            }
            [lo, "<=", name, "<=", hi] => (
                *name,
                parse_num(lo).ok_or_else(|| err(*line, "bad bound"))?,
                parse_num(hi).ok_or_else(|| err(*line, "bad bound"))?,
            ),
            [name, "<=", hi] => {
                let j = declare(&mut model, name, *line)?;
                (*name, model.vars[j].lb, parse_num(hi).ok_or_else(|| err(*line, "bad bound"))?)
            }
            [name, ">=", lo] => {
                let j = declare(&mut model, name, *line)?;
                (*name, parse_num(lo).ok_or_else(|| err(*line, "bad bound"))?, model.vars[j].ub)
            }
            [name, "=", v] => {
                let v = parse_num(v).ok_or_else(|| err(*line, "bad bound"))?;
                (*name, v, v)
            }
            _ => return Err(err(*line, "unrecognised bound")),
        };
        let j = declare(&mut model, name, *line)?;
        model.vars[j].lb = lb;
        model.vars[j].ub = ub;
        explicit.insert(j);
    }
    for name in &binaries {
        let j = declare(&mut model, name, 0)?;
        model.vars[j].binary = true;
        if !explicit.contains(&j) {
            model.vars[j].lb = 0.0;
            model.vars[j].ub = 1.0;
        }
    }

    for (label, terms, sense, rhs) in cons {
        model.add_constraint(label, terms, sense, rhs);
    }
    model.set_objective(obj);
    model.validate()?;
    Ok(model)
}

fn strip_label(toks: &[String]) -> (Option<String>, &[String]) {
    match toks.first() {
        Some(t) if t.ends_with(':') => (Some(t.trim_end_matches(':').to_string()), &toks[1..]),
        _ => (None, toks),
    }
}

fn parse_num(t: &str) -> Option<f64> {
    match t.to_ascii_lowercase().as_str() {
        "+inf" | "inf" | "+infinity" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        s => s.parse().ok(),
    }
}

/// `[+|-] [coef] name` sequences.
fn parse_terms(toks: &[String], line: usize) -> Result<Vec<(String, f64)>> {
    let err = |msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for t in toks {
        match t.as_str() {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Some(v) = parse_num(t) {
                    if coef.is_some() {
                        return Err(err("two coefficients in a row"));
                    }
                    coef = Some(v);
                } else {
                    out.push((t.clone(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(err("dangling coefficient"));
    }
    Ok(out)
}
