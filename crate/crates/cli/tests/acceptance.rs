//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always print; the process fails if any criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::{Duration, Instant};

use common::{random_lp, random_scenario, random_single_consumer, rng, vertex_optimum, Vertex, TEMPORAL};
use rand::Rng;
use vlmarket::profile;
use vlmarket_core::builder::{build, build_disaggregation};
use vlmarket_core::clearing::{clear, ClearingSolution, Prices};
use vlmarket_core::lp::LinearProgram;
use vlmarket_core::model::{builtin_ieee30, builtin_seven_bus, builtin_temporal, Ieee30Config, Scenario};
use vlmarket_core::settlement::{settle, settle_at};
use vlmarket_core::solver::{solve, Status};
use vlmarket_core::sweep::{capacity_sweep, lmp_stats};
use vlmarket_core::verify::{
    eval_dual_function, subgradient_interval, verify, CheckName, CheckStatus, VerificationReport,
};
use vlmarket_core::Tolerances;

const PRIMAL_TOL: f64 = 1e-6;
const SURPLUS_TOL: f64 = 1e-6;
const SETTLEMENT_TOL: f64 = 1e-6;
const GAP_TOL: f64 = 1e-6;
const PRICE_TOL: f64 = 1e-6;
const DISAGG_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-6;
const VERTEX_TOL: f64 = 1e-8;
const LMP_CAP: f64 = 200.0;

const C1_BUDGET: Duration = Duration::from_secs(1);
const C3_BUDGET: Duration = Duration::from_secs(60);
const C7_BUDGET: Duration = Duration::from_secs(300);

const TEMPORAL_PHI: [f64; 9] = [4400.0, 4856.0, 4970.0, 5040.0, 5040.0, 5090.0, 5197.0, 5197.0, 5260.0];
const TEMPORAL_PAYMENT: [f64; 9] = [2650.0, 3450.0, 4900.0, 4710.0, 4710.0, 4910.0, 5810.0, 6210.0, 5990.0];
const TEMPORAL_LOAD_PROFIT: [f64; 9] = [3650.0, 3650.0, 2400.0, 2890.0, 2890.0, 2690.0, 1920.0, 1520.0, 2010.0];

const IEEE_SEEDS: [u64; 4] = [1, 2, 3, 4];

type Criterion = (&'static str, fn(&mut Outcome));

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn builtins() -> Vec<(String, Scenario)> {
    let mut v: Vec<(String, Scenario)> = (1..=9)
        .map(|i| (format!("temporal:{i}"), builtin_temporal(i).unwrap()))
        .collect();
    v.extend((1..=7).map(|i| (format!("sevenbus:{i}"), builtin_seven_bus(i).unwrap())));
    v
}

fn ieee_pair(seed: u64) -> [(String, Scenario); 2] {
    let p = profile::generate(seed);
    let cfg = Ieee30Config::default();
    [
        (format!("ieee30:novl seed {seed}"), builtin_ieee30(false, &p, &cfg).unwrap()),
        (format!("ieee30 seed {seed}"), builtin_ieee30(true, &p, &cfg).unwrap()),
    ]
}

fn full_report(s: &Scenario, c: &ClearingSolution) -> VerificationReport {
    let st = settle(s, c).unwrap();
    verify(s, c, &st, &CheckName::ALL, &Tolerances::default())
}

fn c1_temporal_tables(o: &mut Outcome) {
    let start = Instant::now();
    let solved: Vec<(Scenario, ClearingSolution)> = (1..=9)
        .map(|i| {
            let s = builtin_temporal(i).unwrap();
            let c = clear(&s).unwrap();
            (s, c)
        })
        .collect();
    let elapsed = start.elapsed();
    for (k, (s, c)) in solved.iter().enumerate() {
        let id = k + 1;
        let row = &TEMPORAL[k];
        o.require(c.status == Status::Optimal, || format!("temporal {id} is {}", c.status));
        o.require(close(c.surplus(), TEMPORAL_PHI[k], SURPLUS_TOL), || {
            format!("temporal {id}: surplus {} vs {}", c.surplus(), TEMPORAL_PHI[k])
        });
        let a = &c.allocation;
        let exact = (0..4).all(|t| {
            close(a.d[0][t], row.d[t], PRIMAL_TOL)
                && close(a.p[0][t], row.p[t], PRIMAL_TOL)
                && close(a.delta[t], row.delta[t], PRIMAL_TOL)
        });
        if !exact {
            let degenerate = c.diagnostics.primal_degenerate();
            let suite = full_report(s, c).passed();
            o.require(degenerate && suite, || {
                format!("temporal {id}: (d, p, δ) differ and the optimum is not a verified alternative")
            });
            o.note(format!("temporal {id}: alternative primal optimum, verified"));
        }
    }
    o.require(elapsed < C1_BUDGET, || format!("9 solves took {elapsed:?}"));
    o.note(format!("9 solves in {:.1} ms", elapsed.as_secs_f64() * 1e3));
}

fn temporal_prices(pi: [f64; 4]) -> Prices {
    let mut p = Prices::zeros(1, 4);
    p.pi[0] = pi.to_vec();
    p
}

fn c2_settlement(o: &mut Outcome) {
    for (k, row) in TEMPORAL.iter().enumerate() {
        let id = k + 1;
        let s = builtin_temporal(id).unwrap();
        let c = clear(&s).unwrap();
        let st = settle(&s, &c).unwrap();
        let t = &st.totals;
        o.require(close(row.load_payment, TEMPORAL_PAYMENT[k], 0.0), || format!("table row {id} payment"));
        o.require(close(row.load_profit, TEMPORAL_LOAD_PROFIT[k], 0.0), || format!("table row {id} profit"));
        o.require(close(t.total_revenue, t.load_payment, SETTLEMENT_TOL), || {
            format!("temporal {id}: payments {} vs revenues {}", t.load_payment, t.total_revenue)
        });
        let duals_match = (0..4).all(|ti| close(c.prices.pi[0][ti], row.pi[ti], PRICE_TOL));
        let tables = |tot: &vlmarket_core::settlement::Totals| {
            close(tot.load_payment, row.load_payment, SETTLEMENT_TOL)
                && close(tot.supplier_revenue, row.supplier_revenue, SETTLEMENT_TOL)
                && close(tot.vlink_revenue, row.vlink_revenue, SETTLEMENT_TOL)
                && close(tot.demand_profit, row.load_profit, SETTLEMENT_TOL)
                && close(tot.supplier_profit, row.supplier_profit, SETTLEMENT_TOL)
                && close(tot.vlink_profit, row.vlink_profit, SETTLEMENT_TOL)
        };
        if duals_match {
            o.require(tables(t), || format!("temporal {id}: settlement differs from the tables: {t:?}"));
        } else {
            o.require(c.diagnostics.dual_degenerate(), || {
                format!("temporal {id}: prices {:?} differ without dual degeneracy", c.prices.pi[0])
            });
            // the table prices are another optimal dual; settling there must give the tables
            let at_table = settle_at(&s, &c.allocation, &temporal_prices(row.pi)).unwrap();
            o.require(tables(&at_table.totals), || format!("temporal {id}: tables not reproduced at table prices"));
            o.note(format!("temporal {id}: dual degenerate, solver π {:?}", c.prices.pi[0]));
        }
    }
}

fn c3_theorems(o: &mut Outcome) {
    let start = Instant::now();
    let checks = [
        CheckName::CompetitiveEquilibrium,
        CheckName::RevenueAdequacy,
        CheckName::CostRecovery,
        CheckName::PriceBounds,
        CheckName::VlinkCongestion,
    ];
    let tol = Tolerances::default();
    let mut inconclusive = 0;
    let mut run = |o: &mut Outcome, label: &str, s: &Scenario| {
        let c = clear(s).unwrap();
        if c.status != Status::Optimal {
            o.require(false, || format!("{label}: {}", c.status));
            return;
        }
        let st = settle(s, &c).unwrap();
        let rep = verify(s, &c, &st, &checks, &tol);
        for r in &rep.records {
            let ok = match r.status {
                CheckStatus::Pass | CheckStatus::Skipped => true,
                CheckStatus::DegenerateInconclusive => {
                    inconclusive += 1;
                    r.name == CheckName::VlinkCongestion.as_str()
                        && r.details.iter().any(|d| d.contains("dual multiplicity witness"))
                }
                CheckStatus::Fail => false,
            };
            o.require(ok, || format!("{label}: {} {} {:?}", r.name, r.status, r.details));
        }
    };
    for (label, s) in builtins() {
        run(o, &label, &s);
    }
    for (label, s) in ieee_pair(IEEE_SEEDS[0]) {
        run(o, &label, &s);
    }
    let mut r = rng(1001);
    for k in 0..100 {
        let s = random_scenario(&mut r);
        run(o, &format!("random market {k}"), &s);
    }
    let elapsed = start.elapsed();
    o.require(elapsed < C3_BUDGET, || format!("took {elapsed:?}"));
    o.note(format!(
        "16 builtins, 2 ieee30 variants, 100 random markets in {:.1} s; {inconclusive} inconclusive congestion records",
        elapsed.as_secs_f64()
    ));
}

fn c4_convergence(o: &mut Outcome) {
    let tol = Tolerances::default();
    let mut s = builtin_seven_bus(3).unwrap();
    let k = s.link_index("v7_1").unwrap();
    s.virtual_links[k].capacity = 0.0;
    let mut grid: Vec<f64> = (0..=20).map(f64::from).collect();
    grid.push(1000.0);
    let rep = capacity_sweep(&s, "v7_1", &grid, &tol).unwrap();
    let units: Vec<f64> = rep.points.iter().map(|p| p.unit_profit).collect();
    for w in units.windows(2) {
        o.require(w[1] <= w[0] + GAP_TOL, || format!("unit profit rises {} -> {}", w[0], w[1]));
    }
    let alpha = s.virtual_links[k].price;
    let last = rep.points.last().unwrap();
    o.require(close(last.gap, alpha, GAP_TOL), || format!("final gap {} vs α {alpha}", last.gap));
    o.require(close(last.unit_profit, 0.0, GAP_TOL), || format!("final unit profit {}", last.unit_profit));
    let monotone = rep.checks.iter().find(|r| r.name == "unit_profit_monotone").unwrap();
    o.require(monotone.status == CheckStatus::Pass, || format!("{monotone:?}"));
    o.note(format!("unit profit {:.6} -> {:.6}, final gap {:.6}", units[0], last.unit_profit, last.gap));

    // zero bid cost, ample capacity: linked nodes share one price
    let mut s7 = builtin_seven_bus(7).unwrap();
    for v in &mut s7.virtual_links {
        v.capacity = 1000.0;
    }
    let c = clear(&s7).unwrap();
    let mut linked: Vec<usize> = s7
        .virtual_links
        .iter()
        .flat_map(|v| [s7.node_index(&v.snd.node).unwrap(), s7.node_index(&v.rec.node).unwrap()])
        .collect();
    linked.sort_unstable();
    linked.dedup();
    let hats: Vec<f64> = linked.iter().map(|&n| c.prices.pi_hat(n, 0)).collect();
    let spread = hats.iter().copied().fold(f64::NEG_INFINITY, f64::max) - hats.iter().copied().fold(f64::INFINITY, f64::min);
    o.require(spread <= PRICE_TOL, || format!("π̂ at linked buses {hats:?}"));
    o.note(format!("scenario 7 at capacity 1000: π̂ spread {spread:.2e} over {} buses", hats.len()));
}

fn c5_disaggregation(o: &mut Outcome) {
    let mut r = rng(2002);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let s = random_single_consumer(&mut r);
        let a = solve(&build(&s).unwrap().lp).unwrap();
        let b = solve(&build_disaggregation(&s).unwrap().lp).unwrap();
        o.require(a.status == Status::Optimal && b.status == Status::Optimal, || format!("instance {k} not optimal"));
        let diff = (a.objective - b.objective).abs();
        worst = worst.max(diff);
        o.require(diff <= DISAGG_TOL, || format!("instance {k}: {} vs {}", a.objective, b.objective));
    }
    o.note(format!("50 instances, largest difference {worst:.2e}"));
}

fn perturbed(base: &Prices, s: &Scenario, r: &mut impl Rng) -> Prices {
    let mut p = base.clone();
    for n in 0..s.nodes.len() {
        for t in 0..s.horizon {
            p.pi[n][t] += r.gen_range(-2.0..2.0);
            if s.computing_cap_at(&s.nodes[n], t + 1).is_finite() {
                p.omega_u[n][t] = (p.omega_u[n][t] + r.gen_range(-1.0..1.0)).max(0.0);
                p.omega_l[n][t] = (p.omega_l[n][t] + r.gen_range(-1.0..1.0)).max(0.0);
            }
        }
    }
    p
}

fn c6_duality(o: &mut Outcome) {
    let mut r = rng(3003);
    let mut worst_gap = 0.0f64;
    let mut subgrads = 0;
    let mut all = builtins();
    all.extend(ieee_pair(IEEE_SEEDS[0]));
    for (label, s) in &all {
        let c = clear(s).unwrap();
        let d = eval_dual_function(s, &c.prices).unwrap();
        // D is the negative of the dual objective of the minimization
        let gap = (-d - c.surplus()).abs();
        worst_gap = worst_gap.max(gap);
        o.require(gap <= DUAL_TOL, || format!("{label}: D = {d}, surplus {}", c.surplus()));
        for n in 0..s.nodes.len() {
            for t in 0..s.horizon {
                let g = subgradient_interval(s, &c.prices, (n, t)).unwrap();
                subgrads += 1;
                o.require(g.contains(0.0, DUAL_TOL), || format!("{label} ({n},{t}): {g:?}"));
            }
        }
    }
    let mut strict = 0;
    for (label, s) in all.iter().filter(|(l, _)| !l.starts_with("ieee30")) {
        let c = clear(s).unwrap();
        for _ in 0..100 {
            let p = perturbed(&c.prices, s, &mut r);
            let d = eval_dual_function(s, &p).unwrap();
            o.require(d < c.objective, || format!("{label}: perturbed D = {d} vs optimum {}", c.objective));
            strict += 1;
        }
    }
    o.note(format!(
        "largest |D - optimum| {worst_gap:.2e}, {subgrads} subgradient intervals, {strict} perturbed duals"
    ));
}

fn c7_ieee30(o: &mut Outcome) {
    let start = Instant::now();
    for seed in IEEE_SEEDS {
        let [(_, plain), (_, linked)] = ieee_pair(seed);
        let a = clear(&plain).unwrap();
        let b = clear(&linked).unwrap();
        if !(a.is_optimal() && b.is_optimal()) {
            o.require(false, || format!("seed {seed}: {} / {}", a.status, b.status));
            continue;
        }
        let sa = lmp_stats(&a.prices.flat_pi()).unwrap();
        let sb = lmp_stats(&b.prices.flat_pi()).unwrap();
        o.require(sb.std_dev < sa.std_dev, || format!("seed {seed}: std {} vs {}", sb.std_dev, sa.std_dev));
        o.require(sb.avg_dev < sa.avg_dev, || format!("seed {seed}: avg dev {} vs {}", sb.avg_dev, sa.avg_dev));
        o.require(sa.max <= LMP_CAP + PRICE_TOL, || format!("seed {seed}: max LMP {} without links", sa.max));
        o.require(sb.max <= LMP_CAP + PRICE_TOL, || format!("seed {seed}: max LMP {} with links", sb.max));
        o.require(b.surplus() >= a.surplus() - SURPLUS_TOL, || {
            format!("seed {seed}: surplus {} vs {}", b.surplus(), a.surplus())
        });
        o.note(format!(
            "seed {seed}: std {:.2} -> {:.2}, avg dev {:.2} -> {:.2}, max {:.2} -> {:.2}",
            sa.std_dev, sb.std_dev, sa.avg_dev, sb.avg_dev, sa.max, sb.max
        ));
    }
    let elapsed = start.elapsed();
    o.require(elapsed < C7_BUDGET, || format!("took {elapsed:?}"));
    o.note(format!("{} profiles in {:.1} s", IEEE_SEEDS.len(), elapsed.as_secs_f64()));
}

fn agree(lp: &LinearProgram) -> Result<(), String> {
    let got = solve(lp).map_err(|e| e.to_string())?;
    match vertex_optimum(lp) {
        Vertex::Infeasible if got.status == Status::Infeasible => Ok(()),
        Vertex::Infeasible => Err(format!("oracle infeasible, solver {}", got.status)),
        Vertex::Optimal(v) if got.status == Status::Optimal && (got.objective - v).abs() <= VERTEX_TOL => Ok(()),
        Vertex::Optimal(v) => Err(format!("vertex optimum {v}, solver {} {}", got.status, got.objective)),
    }
}

fn c8_vertex_oracle(o: &mut Outcome) {
    let mut n = 0;
    for (label, s) in builtins() {
        let inst = build(&s).unwrap();
        if inst.num_vars() <= 12 {
            n += 1;
            if let Err(e) = agree(&inst.lp) {
                o.require(false, || format!("{label}: {e}"));
            }
        }
    }
    let mut r = rng(4004);
    let mut markets = 0;
    for k in 0..800 {
        let s = random_scenario(&mut r);
        let inst = build(&s).unwrap();
        if inst.num_vars() > 12 {
            continue;
        }
        markets += 1;
        if let Err(e) = agree(&inst.lp) {
            o.require(false, || format!("random market {k}: {e}"));
        }
    }
    for k in 0..300 {
        let lp = random_lp(&mut r);
        if let Err(e) = agree(&lp) {
            o.require(false, || format!("random LP {k}: {e}"));
        }
    }
    o.require(markets >= 100, || format!("only {markets} small random markets"));
    o.note(format!("{n} builtins, {markets} random markets, 300 random LPs"));
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 temporal table reproduction", c1_temporal_tables),
        ("2 settlement reproduction", c2_settlement),
        ("3 theorem suite", c3_theorems),
        ("4 capacity convergence", c4_convergence),
        ("5 disaggregation equivalence", c5_disaggregation),
        ("6 duality machinery", c6_duality),
        ("7 ieee30 virtual links", c7_ieee30),
        ("8 solver vs vertex enumeration", c8_vertex_oracle),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let mut o = Outcome::new();
        let start = Instant::now();
        f(&mut o);
        let ok = o.failures.is_empty();
        println!(
            "{} criterion {name} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for n in &o.notes {
            println!("     {n}");
        }
        for f in o.failures.iter().take(10) {
            println!("     ! {f}");
        }
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
