//! CSV, JSON and text writers. CSV numbers have exactly six decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use vlmarket_core::builder::LpInstance;
use vlmarket_core::clearing::ClearingSolution;
use vlmarket_core::model::Scenario;
use vlmarket_core::settlement::Settlement;
use vlmarket_core::solver::PrimalDualSolution;
use vlmarket_core::sweep::{Histogram, LmpStats, SweepReport};
use vlmarket_core::verify::{CheckRecord, VerificationReport};

/// Fixed six decimals; negative zero and rounding to zero print unsigned.
pub fn fmt6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner()?)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    fs::write(path, csv_bytes(header, rows)?).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn prices_rows(s: &Scenario, c: &ClearingSolution) -> Vec<Vec<String>> {
    let pr = &c.prices;
    let mut rows = Vec::new();
    for (n, node) in s.nodes.iter().enumerate() {
        for ti in 0..s.horizon {
            rows.push(vec![
                node.clone(),
                (ti + 1).to_string(),
                fmt6(pr.pi[n][ti]),
                fmt6(pr.omega_l[n][ti]),
                fmt6(pr.omega_u[n][ti]),
                fmt6(pr.pi_hat(n, ti)),
            ]);
        }
    }
    rows
}

pub const PRICES_HEADER: [&str; 6] = ["node", "time", "pi", "omega_l", "omega_u", "pi_hat"];

pub const ALLOCATION_HEADER: [&str; 4] = ["kind", "id", "time", "value"];

/// Cleared quantities; line flows are net, positive from `snd` to `rec`.
pub fn allocation_rows(s: &Scenario, c: &ClearingSolution) -> Vec<Vec<String>> {
    let a = &c.allocation;
    let mut rows = Vec::new();
    let mut push = |kind: &str, id: &str, t: String, v: f64| {
        rows.push(vec![kind.to_string(), id.to_string(), t, fmt6(v)]);
    };
    for (i, d) in s.demands.iter().enumerate() {
        for ti in 0..s.horizon {
            push("demand", &d.id, (ti + 1).to_string(), a.d[i][ti]);
        }
    }
    for (i, p) in s.suppliers.iter().enumerate() {
        for ti in 0..s.horizon {
            push("supply", &p.id, (ti + 1).to_string(), a.p[i][ti]);
        }
    }
    for (l, line) in s.lines.iter().enumerate() {
        for ti in 0..s.horizon {
            push("flow", &line.id, (ti + 1).to_string(), a.net_flow(l, ti));
        }
    }
    for (n, node) in s.nodes.iter().enumerate() {
        if let Some(th) = a.theta.get(n) {
            for (ti, v) in th.iter().enumerate() {
                push("angle", node, (ti + 1).to_string(), *v);
            }
        }
    }
    for (k, v) in s.virtual_links.iter().enumerate() {
        push("shift", &v.id, String::new(), a.delta[k]);
    }
    rows
}

pub const SETTLEMENT_HEADER: [&str; 5] = ["kind", "id", "payment", "revenue", "profit"];

/// One row per player in the layout payment / revenue / profit, then totals.
pub fn settlement_rows(st: &Settlement) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let blank = String::new;
    for d in &st.demands {
        rows.push(vec!["demand".into(), d.id.clone(), fmt6(d.cash), blank(), fmt6(d.profit)]);
    }
    for p in &st.suppliers {
        rows.push(vec!["supplier".into(), p.id.clone(), blank(), fmt6(p.cash), fmt6(p.profit)]);
    }
    for l in &st.lines {
        rows.push(vec!["line".into(), l.id.clone(), blank(), fmt6(l.cash), fmt6(l.profit)]);
    }
    for v in &st.links {
        rows.push(vec!["vlink".into(), v.id.clone(), blank(), fmt6(v.revenue), fmt6(v.profit)]);
    }
    let t = &st.totals;
    rows.push(vec!["total".into(), "demands".into(), fmt6(t.load_payment), blank(), fmt6(t.demand_profit)]);
    rows.push(vec!["total".into(), "suppliers".into(), blank(), fmt6(t.supplier_revenue), fmt6(t.supplier_profit)]);
    rows.push(vec![
        "total".into(),
        "transmission".into(),
        blank(),
        fmt6(t.transmission_revenue),
        fmt6(t.transmission_profit),
    ]);
    rows.push(vec!["total".into(), "vlinks".into(), blank(), fmt6(t.vlink_revenue), fmt6(t.vlink_profit)]);
    rows.push(vec!["total".into(), "all".into(), fmt6(t.load_payment), fmt6(t.total_revenue), blank()]);
    rows
}

pub const BASIS_HEADER: [&str; 5] = ["kind", "name", "status", "value", "dual"];

pub fn basis_rows(s: &Scenario, inst: &LpInstance, sol: &PrimalDualSolution) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let label = |b: &vlmarket_core::solver::BasisStatus| serde_json::to_value(b).unwrap().as_str().unwrap().to_string();
    for (j, b) in sol.basis.iter().enumerate() {
        rows.push(vec![
            "column".into(),
            inst.var_name(s, j),
            label(b),
            fmt6(sol.primal[j]),
            fmt6(sol.reduced_costs[j]),
        ]);
    }
    for (i, b) in sol.row_basis.iter().enumerate() {
        let row = &inst.lp.rows[i];
        rows.push(vec![
            "row".into(),
            inst.row_name(s, i),
            label(b),
            fmt6(row.activity(&sol.primal)),
            fmt6(sol.dual[i]),
        ]);
    }
    rows
}

pub fn report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let width = report.records.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let _ = writeln!(out, "{:<width$}  {:<24}  {:>12}", "check", "status", "max_residual");
    for r in &report.records {
        record_line(&mut out, r, width);
    }
    let _ = writeln!(out, "overall: {}", if report.passed() { "pass" } else { "fail" });
    out
}

fn record_line(out: &mut String, r: &CheckRecord, width: usize) {
    let _ = writeln!(out, "{:<width$}  {:<24}  {:>12.3e}", r.name, r.status.to_string(), r.max_residual);
    for d in &r.details {
        let _ = writeln!(out, "    {d}");
    }
}

#[derive(Serialize)]
pub struct ReportFile<'a> {
    pub passed: bool,
    #[serde(flatten)]
    pub report: &'a VerificationReport,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "entity",
    "point",
    "eps",
    "capacity",
    "surplus",
    "gap",
    "unit_profit",
    "flow",
    "interior",
    "degenerate_basics",
    "zero_reduced_cost_nonbasics",
];

pub fn sweep_rows(rep: &SweepReport) -> Vec<Vec<String>> {
    let one = |label: String, p: &vlmarket_core::sweep::SweepPoint| {
        vec![
            rep.entity.clone(),
            label,
            fmt6(p.eps),
            fmt6(p.capacity),
            fmt6(p.surplus),
            fmt6(p.gap),
            fmt6(p.unit_profit),
            fmt6(p.flow),
            p.interior.to_string(),
            p.degenerate_basics.to_string(),
            p.zero_reduced_cost_nonbasics.to_string(),
        ]
    };
    let mut rows = vec![one("base".into(), &rep.base)];
    for (k, p) in rep.points.iter().enumerate() {
        rows.push(one((k + 1).to_string(), p));
    }
    rows
}

pub const HISTOGRAM_HEADER: [&str; 4] = ["series", "bin_lo", "bin_hi", "count"];

pub fn histogram_rows(series: &str, h: &Histogram) -> Vec<Vec<String>> {
    h.counts
        .iter()
        .enumerate()
        .map(|(k, c)| vec![series.to_string(), fmt6(h.edges[k]), fmt6(h.edges[k + 1]), c.to_string()])
        .collect()
}

pub const STATS_HEADER: [&str; 2] = ["stat", "value"];

pub fn stats_rows(st: &LmpStats) -> Vec<Vec<String>> {
    [
        ("mean", st.mean),
        ("median", st.median),
        ("max", st.max),
        ("min", st.min),
        ("std_dev", st.std_dev),
        ("avg_dev", st.avg_dev),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), fmt6(*v)])
    .collect()
}
