//! Plain-text export in the CPLEX LP layout, readable by most MILP solvers.

use std::fmt::Write;

use crate::milp::model::{MilpModel, Sense, VarKind};

fn term(out: &mut String, coeff: f64, name: &str, first: bool) {
    let sign = if coeff < 0.0 {
        "-"
    } else if first {
        ""
    } else {
        "+"
    };
    let mag = coeff.abs();
    if mag == 1.0 {
        let _ = write!(out, " {sign} {name}");
    } else {
        let _ = write!(out, " {sign} {mag:?} {name}");
    }
}

pub fn to_lp_string(model: &MilpModel) -> String {
    let name = |v: usize| model.variables[v].name.as_str();
    let mut out = String::new();
    let _ = writeln!(out, "\\ objective constant {:?}", model.objective_constant);
    out.push_str("Minimize\n obj:");
    if model.objective.is_empty() {
        out.push_str(" 0");
    }
    for (k, &(v, c)) in model.objective.iter().enumerate() {
        term(&mut out, c, name(v), k == 0);
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        if c.coeffs.is_empty() {
            out.push_str(" 0");
        }
        for (k, &(v, a)) in c.coeffs.iter().enumerate() {
            term(&mut out, a, name(v), k == 0);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {:?}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        let _ = writeln!(out, " {:?} <= {} <= {:?}", v.lower, v.name, v.upper);
    }
    for (label, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let names: Vec<&str> = model
            .variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{label}");
            for chunk in names.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}
