//! CPLEX LP-format text export.
//!
//! Numbers use Rust's shortest round-trip formatting, so equal inputs give
//! byte-identical files.

use std::fmt::Write;

use vlmarket_core::builder::LpInstance;
use vlmarket_core::lp::Sense;
use vlmarket_core::model::Scenario;

const TERMS_PER_LINE: usize = 6;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn terms(out: &mut String, items: &[(f64, String)]) {
    for (k, (c, name)) in items.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(c.abs()));
    }
}

pub fn to_lp(s: &Scenario, inst: &LpInstance) -> String {
    let lp = &inst.lp;
    let names: Vec<String> = (0..lp.num_cols()).map(|j| inst.var_name(s, j)).collect();
    let mut out = String::new();
    out.push_str("\\ space-time market clearing, minimization of negative surplus\n");
    out.push_str("Minimize\n obj:");
    let mut obj: Vec<(f64, String)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| (c, names[j].clone()))
        .collect();
    if obj.is_empty() && !names.is_empty() {
        obj.push((0.0, names[0].clone()));
    }
    terms(&mut out, &obj);
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let _ = write!(out, " {}:", inst.row_name(s, i));
        let items: Vec<(f64, String)> = row.coeffs.iter().map(|&(j, a)| (a, names[j].clone())).collect();
        if items.is_empty() {
            out.push_str(" 0 ");
            out.push_str(names.first().map(String::as_str).unwrap_or("x"));
        }
        terms(&mut out, &items);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " {name} = {}", num(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", num(lo), num(hi));
        }
    }
    out.push_str("End\n");
    out
}
