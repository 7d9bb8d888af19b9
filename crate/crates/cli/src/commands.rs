//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use vlmarket_core::builder::{build, build_disaggregation};
use vlmarket_core::clearing::{clear, clear_with, ClearingSolution};
use vlmarket_core::model::Scenario;
use vlmarket_core::settlement::settle;
use vlmarket_core::solver::{PrimalSimplex, Status};
use vlmarket_core::sweep::{
    capacity_sweep, histogram, lmp_stats, nesting_violation, surplus_monotonicity, SweepReport,
};
use vlmarket_core::verify::{verify, CheckName, CheckRecord, CheckStatus, VerificationReport};
use vlmarket_core::Tolerances;

use crate::args::{
    expand_chain, parse_checks, parse_sweep, ClearArgs, Command, ExportArgs, ProfileArgs, StatsArgs,
    SweepArgs, SweepTarget, VerifyArgs,
};
use crate::io::{builtin, load_scenario};
use crate::output::*;
use crate::{lpfile, profile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NOT_OPTIMAL: i32 = 2;

pub fn run(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Clear(a) => cmd_clear(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Export(a) => cmd_export(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Profile(a) => cmd_profile(a),
    }
}

fn out_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).with_context(|| format!("cannot create {}", p.display()))
}

fn not_optimal(status: Status) -> i32 {
    eprintln!("market is {status}");
    EXIT_NOT_OPTIMAL
}

/// Writes the report files, prints the table and maps the outcome to an exit code.
fn finish_report(out: &Path, report: &VerificationReport) -> Result<i32> {
    let text = report_text(report);
    write_json(
        &out.join("report.json"),
        &ReportFile {
            passed: report.passed(),
            report,
        },
    )?;
    write_text(&out.join("report.txt"), &text)?;
    print!("{text}");
    for r in &report.records {
        if r.status == CheckStatus::DegenerateInconclusive {
            eprintln!("warning: {} is inconclusive under dual degeneracy", r.name);
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

fn run_checks(s: &Scenario, c: &ClearingSolution, checks: &[CheckName], tol: &Tolerances) -> Result<VerificationReport> {
    let st = settle(s, c)?;
    Ok(verify(s, c, &st, checks, tol))
}

pub fn cmd_clear(a: &ClearArgs) -> Result<i32> {
    let s = load_scenario(&a.source)?;
    let tol = a.tol.resolve()?;
    let checks = parse_checks(&a.checks)?;
    out_dir(&a.out)?;
    let (inst, sol, c) = clear_with(&s, &PrimalSimplex::default())?;
    write_json(&a.out.join("solution.json"), &c)?;
    if a.dump_basis && sol.is_optimal() {
        write_csv(&a.out.join("basis.csv"), &BASIS_HEADER, &basis_rows(&s, &inst, &sol))?;
    }
    if !c.is_optimal() {
        return Ok(not_optimal(c.status));
    }
    println!(
        "status optimal, surplus {}, {} iterations",
        fmt6(c.surplus()),
        c.diagnostics.iterations
    );
    if c.diagnostics.dual_degenerate() {
        eprintln!(
            "warning: {} basic variables sit at a bound; other optimal prices may exist",
            c.diagnostics.degenerate_basics
        );
    }
    let st = settle(&s, &c)?;
    if a.format.csv() {
        write_csv(&a.out.join("settlement.csv"), &SETTLEMENT_HEADER, &settlement_rows(&st))?;
        write_csv(&a.out.join("prices.csv"), &PRICES_HEADER, &prices_rows(&s, &c))?;
        write_csv(&a.out.join("allocation.csv"), &ALLOCATION_HEADER, &allocation_rows(&s, &c))?;
    }
    if a.format.json() {
        write_json(&a.out.join("settlement.json"), &st)?;
    }
    if a.verify || !a.checks.is_empty() {
        let report = verify(&s, &c, &st, &checks, &tol);
        return finish_report(&a.out, &report);
    }
    Ok(EXIT_OK)
}

/// Rejects a replayed solution whose shape does not fit the scenario.
fn check_solution_shape(s: &Scenario, c: &ClearingSolution) -> Result<()> {
    let t = s.horizon;
    let grid = |v: &Vec<Vec<f64>>, n: usize| v.len() == n && v.iter().all(|r| r.len() == t);
    let a = &c.allocation;
    let pr = &c.prices;
    let ok = grid(&a.d, s.demands.len())
        && grid(&a.p, s.suppliers.len())
        && a.f.len() == s.lines.len()
        && a.f.iter().all(|r| r.len() == t)
        && (a.theta.is_empty() || grid(&a.theta, s.nodes.len()))
        && a.delta.len() == s.virtual_links.len()
        && grid(&pr.pi, s.nodes.len())
        && grid(&pr.omega_l, s.nodes.len())
        && grid(&pr.omega_u, s.nodes.len());
    if !ok {
        bail!("solution dimensions do not match the scenario");
    }
    if [&a.d, &a.p, &pr.pi, &pr.omega_l, &pr.omega_u]
        .iter()
        .flat_map(|v| v.iter().flatten())
        .chain(a.delta.iter())
        .any(|x| !x.is_finite())
    {
        bail!("solution contains non-finite values");
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let s = load_scenario(&a.source)?;
    let tol = a.tol.resolve()?;
    let checks = parse_checks(&a.checks)?;
    let c = match &a.solution {
        Some(p) => crate::io::read_json::<ClearingSolution>(p)?,
        None => clear(&s)?,
    };
    if !c.is_optimal() {
        return Ok(not_optimal(c.status));
    }
    check_solution_shape(&s, &c)?;
    out_dir(&a.out)?;
    let report = run_checks(&s, &c, &checks, &tol)?;
    finish_report(&a.out, &report)
}

#[derive(Serialize)]
struct ChainFile<'a> {
    selectors: &'a [String],
    surplus: &'a [f64],
    check: &'a CheckRecord,
}

fn sweep_one(s: &Scenario, spec: &str, tol: &Tolerances) -> Result<SweepReport> {
    let spec = parse_sweep(spec)?;
    let mut sc = s.clone();
    let grid: Vec<f64> = if spec.absolute {
        let base = spec.values[0];
        match spec.target {
            SweepTarget::Link => {
                let Some(k) = sc.link_index(&spec.id) else {
                    bail!("no virtual link with id {}", spec.id);
                };
                sc.virtual_links[k].capacity = base;
            }
            SweepTarget::Line => {
                let Some(k) = sc.line_index(&spec.id) else {
                    bail!("no line with id {}", spec.id);
                };
                sc.lines[k].flow_cap = base;
            }
        }
        crate::io::check_valid(&sc)?;
        spec.values.iter().map(|v| v - base).collect()
    } else {
        let known = match spec.target {
            SweepTarget::Link => sc.link_index(&spec.id).is_some(),
            SweepTarget::Line => sc.line_index(&spec.id).is_some(),
        };
        if !known {
            bail!("no {} with id {}", if spec.target == SweepTarget::Link { "virtual link" } else { "line" }, spec.id);
        }
        spec.values.clone()
    };
    Ok(capacity_sweep(&sc, &spec.id, &grid, tol)?)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    if a.sweep.is_empty() && a.chain.is_none() {
        bail!("nothing to do: give --sweep and/or --chain");
    }
    let tol = a.tol.resolve()?;
    out_dir(&a.out)?;
    let mut passed = true;
    if !a.sweep.is_empty() {
        let s = load_scenario(&a.source)?;
        let mut reports = Vec::new();
        let mut rows = Vec::new();
        let mut hist = Vec::new();
        for spec in &a.sweep {
            let rep = sweep_one(&s, spec, &tol)?;
            rows.extend(sweep_rows(&rep));
            let base_pi: Vec<f64> = rep.base.pi.iter().flatten().copied().collect();
            hist.extend(histogram_rows(&format!("{}/base", rep.entity), &histogram(&base_pi, a.bins)?));
            for (k, p) in rep.points.iter().enumerate() {
                let pi: Vec<f64> = p.pi.iter().flatten().copied().collect();
                hist.extend(histogram_rows(&format!("{}/{}", rep.entity, k + 1), &histogram(&pi, a.bins)?));
            }
            for r in &rep.checks {
                println!("{} {}: {} (max residual {:.3e})", rep.entity, r.name, r.status, r.max_residual);
                for d in &r.details {
                    println!("    {d}");
                }
            }
            if let Some(last) = rep.points.last() {
                println!("{} final gap {} unit profit {}", rep.entity, fmt6(last.gap), fmt6(last.unit_profit));
            }
            passed &= rep.passed();
            reports.push(rep);
        }
        write_csv(&a.out.join("sweep.csv"), &SWEEP_HEADER, &rows)?;
        write_csv(&a.out.join("lmp_histogram.csv"), &HISTOGRAM_HEADER, &hist)?;
        write_json(&a.out.join("sweep.json"), &reports)?;
    }
    if let Some(chain) = &a.chain {
        let selectors = expand_chain(chain)?;
        let scenarios = selectors
            .iter()
            .map(|sel| builtin(sel, &a.source))
            .collect::<Result<Vec<_>>>()?;
        let broken = scenarios
            .windows(2)
            .enumerate()
            .find_map(|(k, w)| nesting_violation(&w[0], &w[1]).map(|r| (k + 1, r)));
        let (record, surplus) = match broken {
            None => surplus_monotonicity(&scenarios, &tol)?,
            Some((step, reason)) => {
                let mut surplus = Vec::new();
                for s in &scenarios {
                    let c = clear(s)?;
                    if !c.is_optimal() {
                        return Ok(not_optimal(c.status));
                    }
                    surplus.push(c.surplus());
                }
                let record = CheckRecord {
                    name: "surplus_monotonicity".into(),
                    status: CheckStatus::Skipped,
                    max_residual: 0.0,
                    details: vec![format!("step {step} is not nested: {reason}")],
                };
                (record, surplus)
            }
        };
        let rows: Vec<Vec<String>> = selectors
            .iter()
            .zip(&surplus)
            .enumerate()
            .map(|(k, (sel, phi))| vec![(k + 1).to_string(), sel.clone(), fmt6(*phi)])
            .collect();
        write_csv(&a.out.join("chain.csv"), &["step", "selector", "surplus"], &rows)?;
        write_json(
            &a.out.join("chain.json"),
            &ChainFile {
                selectors: &selectors,
                surplus: &surplus,
                check: &record,
            },
        )?;
        for r in &rows {
            println!("{} {} {}", r[0], r[1], r[2]);
        }
        println!("{}: {}", record.name, record.status);
        for d in &record.details {
            println!("    {d}");
        }
        passed &= record.passed();
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_export(a: &ExportArgs) -> Result<i32> {
    let s = load_scenario(&a.source)?;
    let inst = if a.disaggregation {
        build_disaggregation(&s)?
    } else {
        build(&s)?
    };
    out_dir(&a.out)?;
    write_text(&a.out.join("model.lp"), &lpfile::to_lp(&s, &inst))?;
    write_json(&a.out.join("scenario.json"), &s)?;
    println!("{} columns, {} rows", inst.num_vars(), inst.num_rows());
    Ok(EXIT_OK)
}

pub fn cmd_stats(a: &StatsArgs) -> Result<i32> {
    let s = load_scenario(&a.source)?;
    let c = clear(&s)?;
    if !c.is_optimal() {
        return Ok(not_optimal(c.status));
    }
    let pi = c.prices.flat_pi();
    let st = lmp_stats(&pi)?;
    let h = histogram(&pi, a.bins)?;
    out_dir(&a.out)?;
    let rows = stats_rows(&st);
    write_csv(&a.out.join("lmp_stats.csv"), &STATS_HEADER, &rows)?;
    write_csv(&a.out.join("lmp_histogram.csv"), &HISTOGRAM_HEADER, &histogram_rows("pi", &h))?;
    write_json(&a.out.join("lmp_stats.json"), &st)?;
    println!("surplus {}", fmt6(c.surplus()));
    for r in rows {
        println!("{} {}", r[0], r[1]);
    }
    Ok(EXIT_OK)
}

pub fn cmd_profile(a: &ProfileArgs) -> Result<i32> {
    let p = profile::generate(a.seed);
    match &a.out {
        Some(path) => write_json(path, &p)?,
        None => println!("{}", serde_json::to_string_pretty(&p)?),
    }
    Ok(EXIT_OK)
}
