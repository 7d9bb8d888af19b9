//! Property checks on a cleared market.
//!
//! Every check returns a [`CheckRecord`]; a failing property is a result,
//! not an error. Residuals are absolute and compared against [`Tolerances`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::builder::{build, build_disaggregation, BuildError, VarKind};
use crate::clearing::{ClearingSolution, Prices};
use crate::lp::{LinearProgram, Sense};
use crate::model::Scenario;
use crate::settlement::Settlement;
use crate::solver::{solve, solve_subproblem_flows, SolveError, Status};
use crate::Tolerances;

/// Ties in the piecewise subgradient formulas.
pub const TIE_TOL: f64 = 1e-9;
/// Finite-difference step for the numerically bracketed terms.
pub const FD_STEP: f64 = 1e-5;
/// At most this many offending items are listed in a record.
const MAX_DETAILS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    /// Failed against the returned dual, but the solve shows several optimal
    /// duals, so another optimal dual may satisfy the relation.
    DegenerateInconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Skipped => "skipped",
            Self::DegenerateInconclusive => "degenerate-inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    CompetitiveEquilibrium,
    RevenueAdequacy,
    CostRecovery,
    PriceBounds,
    VlinkCongestion,
    DisaggregationEquivalence,
    DualFunction,
    Subgradient,
}

impl CheckName {
    pub const ALL: [CheckName; 8] = [
        Self::CompetitiveEquilibrium,
        Self::RevenueAdequacy,
        Self::CostRecovery,
        Self::PriceBounds,
        Self::VlinkCongestion,
        Self::DisaggregationEquivalence,
        Self::DualFunction,
        Self::Subgradient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CompetitiveEquilibrium => "competitive_equilibrium",
            Self::RevenueAdequacy => "revenue_adequacy",
            Self::CostRecovery => "cost_recovery",
            Self::PriceBounds => "price_bounds",
            Self::VlinkCongestion => "vlink_congestion",
            Self::DisaggregationEquivalence => "disaggregation_equivalence",
            Self::DualFunction => "dual_function",
            Self::Subgradient => "subgradient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub max_residual: f64,
    pub details: Vec<String>,
}

impl CheckRecord {
    fn new(name: CheckName) -> Self {
        Self {
            name: name.as_str().into(),
            status: CheckStatus::Pass,
            max_residual: 0.0,
            details: Vec::new(),
        }
    }

    fn skipped(name: CheckName, why: impl Into<String>) -> Self {
        let mut r = Self::new(name);
        r.status = CheckStatus::Skipped;
        r.details.push(why.into());
        r
    }

    /// Records a residual; anything above `tol` fails the check.
    fn observe(&mut self, residual: f64, tol: f64, what: impl FnOnce() -> String) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        if residual > self.max_residual {
            self.max_residual = residual;
        }
        if residual > tol {
            self.status = CheckStatus::Fail;
            if self.details.len() < MAX_DETAILS {
                self.details.push(format!("{} (residual {residual:.3e})", what()));
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    /// True when no check failed; inconclusive and skipped checks count as passing.
    pub fn passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn get(&self, name: CheckName) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRecoveryMode {
    PerNodeTime,
    PerPlayerHorizon,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DualError {
    #[error("price arrays do not match the scenario ({0})")]
    Dimension(&'static str),
    #[error("ω^u is nonzero where the computing cap is infinite at ({node},{time})")]
    UnboundedOmega { node: String, time: usize },
    #[error("ω must be split into nonnegative parts")]
    NegativeOmega,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("a profit subproblem is not optimal: {0}")]
    Subproblem(Status),
}

/// Runs `checks` in order; each appears once in the report.
///
/// Where suppliers ramp, cost recovery is judged per player over the horizon
/// and price bounds leave ramp-limited suppliers out.
pub fn verify(
    s: &Scenario,
    c: &ClearingSolution,
    settlement: &Settlement,
    checks: &[CheckName],
    tol: &Tolerances,
) -> VerificationReport {
    let mut seen = Vec::new();
    let mut records = Vec::new();
    for &name in checks {
        if seen.contains(&name) {
            continue;
        }
        seen.push(name);
        let rec = match name {
            CheckName::CompetitiveEquilibrium => check_competitive_equilibrium(s, c, settlement, tol),
            CheckName::RevenueAdequacy => check_revenue_adequacy(settlement, tol),
            CheckName::CostRecovery => {
                if s.has_ramping() {
                    let mut r = check_cost_recovery(settlement, CostRecoveryMode::PerPlayerHorizon, tol);
                    r.note("ramping couples periods; profits summed over the horizon per player");
                    r
                } else {
                    check_cost_recovery(settlement, CostRecoveryMode::PerNodeTime, tol)
                }
            }
            CheckName::PriceBounds => check_price_bounds(s, c, tol),
            CheckName::VlinkCongestion => check_vlink_congestion(s, c, tol),
            CheckName::DisaggregationEquivalence => match check_disaggregation_equivalence(s, tol) {
                Ok(r) => r,
                Err(e) => CheckRecord::skipped(name, e.to_string()),
            },
            CheckName::DualFunction => check_dual_function(s, c, tol),
            CheckName::Subgradient => check_subgradients(s, c, tol),
        };
        records.push(rec);
    }
    VerificationReport {
        records,
        tolerances: *tol,
    }
}

fn not_optimal(name: CheckName, c: &ClearingSolution) -> Option<CheckRecord> {
    (!c.is_optimal()).then(|| {
        let mut r = CheckRecord::new(name);
        r.status = CheckStatus::Fail;
        r.max_residual = f64::INFINITY;
        r.note(format!("solution status is {}", c.status));
        r
    })
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// `[node][t]` power balance residuals of an allocation.
pub fn balance_residuals(s: &Scenario, c: &ClearingSolution) -> Vec<Vec<f64>> {
    let a = &c.allocation;
    let mut r = vec![vec![0.0; s.horizon]; s.nodes.len()];
    for (i, p) in s.suppliers.iter().enumerate() {
        let n = s.node_index(&p.node).expect("validated");
        for t in 0..s.horizon {
            r[n][t] += a.p[i][t];
        }
    }
    for (j, d) in s.demands.iter().enumerate() {
        let n = s.node_index(&d.node).expect("validated");
        for t in 0..s.horizon {
            r[n][t] -= a.d[j][t];
        }
    }
    for (l, line) in s.lines.iter().enumerate() {
        let from = s.node_index(&line.snd).expect("validated");
        let to = s.node_index(&line.rec).expect("validated");
        for t in 0..s.horizon {
            let f = a.net_flow(l, t);
            r[from][t] -= f;
            r[to][t] += f;
        }
    }
    for (v, link) in s.virtual_links.iter().enumerate() {
        let a_st = s.st_of(&link.snd).expect("validated");
        let b_st = s.st_of(&link.rec).expect("validated");
        let (an, at) = (a_st / s.horizon, a_st % s.horizon);
        let (bn, bt) = (b_st / s.horizon, b_st % s.horizon);
        r[an][at] += a.delta[v];
        r[bn][bt] -= a.delta[v];
    }
    r
}

fn link_ends(s: &Scenario, v: usize) -> ((usize, usize), (usize, usize)) {
    let h = s.horizon;
    let a = s.st_of(&s.virtual_links[v].snd).expect("validated");
    let b = s.st_of(&s.virtual_links[v].rec).expect("validated");
    ((a / h, a % h), (b / h, b % h))
}

fn link_gap(s: &Scenario, pr: &Prices, v: usize) -> f64 {
    let ((an, at), (bn, bt)) = link_ends(s, v);
    pr.pi_hat(an, at) - pr.pi_hat(bn, bt) - s.virtual_links[v].price
}

/// Optimal horizon profit of a ramp-limited supplier at prices `pi[t]`.
pub fn supplier_horizon_optimum(s: &Scenario, i: usize, pi: &[f64]) -> Result<f64, DualError> {
    let p = &s.suppliers[i];
    let mut lp = LinearProgram::default();
    let cols: Vec<usize> = (0..s.horizon)
        .map(|t| lp.add_col(-(pi[t] - p.price[t]), 0.0, p.capacity[t]))
        .collect();
    if let Some(r) = p.ramp_limit {
        for t in 1..s.horizon {
            lp.add_row(vec![(cols[t], 1.0), (cols[t - 1], -1.0)], Sense::Le, r);
            lp.add_row(vec![(cols[t - 1], 1.0), (cols[t], -1.0)], Sense::Le, r);
        }
    }
    let sol = solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(DualError::Subproblem(sol.status));
    }
    Ok(-sol.objective)
}

fn ramp_limited(s: &Scenario, i: usize) -> bool {
    s.horizon > 1 && s.suppliers[i].ramp_limit.is_some()
}

/// Each player's allocated profit equals the best it could do alone at the
/// cleared prices, and the balances hold.
pub fn check_competitive_equilibrium(
    s: &Scenario,
    c: &ClearingSolution,
    st: &Settlement,
    tol: &Tolerances,
) -> CheckRecord {
    let name = CheckName::CompetitiveEquilibrium;
    if let Some(r) = not_optimal(name, c) {
        return r;
    }
    let mut rec = CheckRecord::new(name);
    let pr = &c.prices;
    for (i, p) in s.suppliers.iter().enumerate() {
        let n = s.node_index(&p.node).expect("validated");
        if ramp_limited(s, i) {
            match supplier_horizon_optimum(s, i, &pr.pi[n]) {
                Ok(best) => rec.observe((best - st.suppliers[i].profit).abs(), tol.price, || {
                    format!("supplier {} horizon profit {} vs optimum {best}", p.id, st.suppliers[i].profit)
                }),
                Err(e) => rec.observe(f64::INFINITY, tol.price, || format!("supplier {}: {e}", p.id)),
            }
            continue;
        }
        for t in 0..s.horizon {
            let best = pos((pr.pi[n][t] - p.price[t]) * p.capacity[t]);
            let got = st.suppliers[i].profit_by_time[t];
            rec.observe((best - got).abs(), tol.price, || {
                format!("supplier {} at t{}: profit {got} vs optimum {best}", p.id, t + 1)
            });
        }
    }
    for (j, d) in s.demands.iter().enumerate() {
        let n = s.node_index(&d.node).expect("validated");
        for t in 0..s.horizon {
            let best = pos((d.price[t] - pr.pi_hat(n, t)) * d.capacity[t]);
            let got = st.demands[j].profit_by_time[t];
            rec.observe((best - got).abs(), tol.price, || {
                format!("demand {} at t{}: profit {got} vs optimum {best}", d.id, t + 1)
            });
        }
    }
    for (v, link) in s.virtual_links.iter().enumerate() {
        let best = pos(link_gap(s, pr, v) * link.capacity);
        let got = st.links[v].profit;
        rec.observe((best - got).abs(), tol.price, || {
            format!("link {}: profit {got} vs optimum {best}", link.id)
        });
    }
    if !s.lines.is_empty() {
        for t in 0..s.horizon {
            let prices: Vec<f64> = (0..s.nodes.len()).map(|n| pr.pi[n][t]).collect();
            let got: f64 = st.edges.iter().map(|e| e.profit_by_time[t]).sum();
            match solve_subproblem_flows(s, t + 1, &prices) {
                Ok(sub) if sub.status == Status::Optimal => {
                    rec.observe((sub.profit - got).abs(), tol.price, || {
                        format!("transmission at t{}: profit {got} vs optimum {}", t + 1, sub.profit)
                    })
                }
                Ok(sub) => rec.observe(f64::INFINITY, tol.price, || {
                    format!("transmission subproblem at t{} is {}", t + 1, sub.status)
                }),
                Err(e) => rec.observe(f64::INFINITY, tol.price, || format!("transmission: {e}")),
            }
        }
    }
    for (n, row) in balance_residuals(s, c).iter().enumerate() {
        for (t, r) in row.iter().enumerate() {
            rec.observe(r.abs(), tol.feas, || {
                format!("balance at ({},{})", s.nodes[n], t + 1)
            });
        }
    }
    rec
}

/// Load payments equal supplier, transmission and link revenue.
pub fn check_revenue_adequacy(st: &Settlement, tol: &Tolerances) -> CheckRecord {
    let mut rec = CheckRecord::new(CheckName::RevenueAdequacy);
    let t = &st.totals;
    rec.observe((t.load_payment - t.total_revenue).abs(), tol.price, || {
        format!(
            "payments {} vs revenues {} = {} + {} + {}",
            t.load_payment,
            t.total_revenue,
            t.supplier_revenue,
            t.transmission_revenue,
            t.vlink_revenue
        )
    });
    rec
}

/// No player ends with negative profit. Transmission is one player per
/// time: under DC flow single lines may run at a loss around loops.
pub fn check_cost_recovery(st: &Settlement, mode: CostRecoveryMode, tol: &Tolerances) -> CheckRecord {
    let mut rec = CheckRecord::new(CheckName::CostRecovery);
    let horizon = st.pi.first().map_or(0, Vec::len);
    let transmission: Vec<f64> = (0..horizon)
        .map(|t| st.edges.iter().map(|e| e.profit_by_time[t]).sum())
        .collect();
    let transmission_id = String::from("operator");
    let players = st
        .demands
        .iter()
        .map(|p| ("demand", &p.id, p.profit, &p.profit_by_time))
        .chain(
            st.suppliers
                .iter()
                .map(|p| ("supplier", &p.id, p.profit, &p.profit_by_time)),
        )
        .chain(core::iter::once((
            "transmission",
            &transmission_id,
            transmission.iter().sum(),
            &transmission,
        )));
    for (kind, id, total, by_time) in players {
        match mode {
            CostRecoveryMode::PerPlayerHorizon => {
                rec.observe(-total, tol.price, || format!("{kind} {id} profit {total}"))
            }
            CostRecoveryMode::PerNodeTime => {
                for (t, x) in by_time.iter().enumerate() {
                    rec.observe(-x, tol.price, || format!("{kind} {id} at t{}: profit {x}", t + 1));
                }
            }
        }
    }
    for l in &st.links {
        rec.observe(-l.profit, tol.price, || format!("link {} profit {}", l.id, l.profit));
    }
    rec
}

/// Cleared suppliers bid at most the nodal price; cleared demands bid at
/// least the price plus the computing-cap dual.
pub fn check_price_bounds(s: &Scenario, c: &ClearingSolution, tol: &Tolerances) -> CheckRecord {
    let name = CheckName::PriceBounds;
    if let Some(r) = not_optimal(name, c) {
        return r;
    }
    let mut rec = CheckRecord::new(name);
    let a = &c.allocation;
    let pr = &c.prices;
    let mut checked = 0usize;
    for n in 0..s.nodes.len() {
        let node = &s.nodes[n];
        for t in 0..s.horizon {
            let lo = s
                .suppliers
                .iter()
                .enumerate()
                .filter(|(i, p)| &p.node == node && a.p[*i][t] > tol.cleared)
                .filter(|(i, _)| !ramp_limited(s, *i))
                .map(|(_, p)| p.price[t])
                .fold(f64::NEG_INFINITY, f64::max);
            let hi = s
                .demands
                .iter()
                .enumerate()
                .filter(|(j, d)| &d.node == node && a.d[*j][t] > tol.cleared)
                .map(|(_, d)| d.price[t] - pr.omega(n, t))
                .fold(f64::INFINITY, f64::min);
            let pi = pr.pi[n][t];
            if lo.is_finite() {
                checked += 1;
                rec.observe(lo - pi, tol.price, || {
                    format!("({node},{}): cleared supplier bid {lo} above π {pi}", t + 1)
                });
            }
            if hi.is_finite() {
                checked += 1;
                rec.observe(pi - hi, tol.price, || {
                    format!("({node},{}): π {pi} above cleared demand bid less ω {hi}", t + 1)
                });
            }
        }
    }
    if s.has_ramping() {
        rec.note("ramp-limited suppliers are left out of the lower bound");
    }
    if checked == 0 {
        rec.status = CheckStatus::Skipped;
        rec.note("no space-time node has a cleared player");
    }
    rec
}

/// Used links carry a price gap of at least their bid; links with slack on
/// both sides carry exactly their bid.
pub fn check_vlink_congestion(s: &Scenario, c: &ClearingSolution, tol: &Tolerances) -> CheckRecord {
    let name = CheckName::VlinkCongestion;
    if let Some(r) = not_optimal(name, c) {
        return r;
    }
    let mut rec = CheckRecord::new(name);
    for (v, link) in s.virtual_links.iter().enumerate() {
        let delta = c.allocation.delta[v];
        let gap = link_gap(s, &c.prices, v);
        if delta > tol.cleared {
            rec.observe(-gap, tol.price, || {
                format!("link {} used ({delta}) with π̂ gap {} below bid", link.id, gap + link.price)
            });
            if delta < link.capacity - tol.cleared {
                rec.observe(gap.abs(), tol.price, || {
                    format!("link {} interior ({delta} of {}) with unit profit {gap}", link.id, link.capacity)
                });
            }
        }
    }
    if rec.status == CheckStatus::Fail && c.diagnostics.dual_degenerate() {
        rec.status = CheckStatus::DegenerateInconclusive;
        rec.note(format!(
            "dual multiplicity witness: {} basic variables at a bound",
            c.diagnostics.degenerate_basics
        ));
    }
    rec
}

/// The link formulation and the per-node disaggregation reach the same
/// optimum; served loads agree when that optimum is unique.
pub fn check_disaggregation_equivalence(s: &Scenario, tol: &Tolerances) -> Result<CheckRecord, BuildError> {
    let dis = build_disaggregation(s)?;
    let vl = build(s)?;
    let mut rec = CheckRecord::new(CheckName::DisaggregationEquivalence);
    let (a, b) = match (solve(&vl.lp), solve(&dis.lp)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            rec.observe(f64::INFINITY, tol.gap, || format!("solve failed: {e}"));
            return Ok(rec);
        }
    };
    if a.status != b.status {
        rec.observe(f64::INFINITY, tol.gap, || {
            format!("statuses differ: {} vs {}", a.status, b.status)
        });
        return Ok(rec);
    }
    if a.status != Status::Optimal {
        rec.status = CheckStatus::Skipped;
        rec.note(format!("both formulations are {}", a.status));
        return Ok(rec);
    }
    rec.observe((a.objective - b.objective).abs(), tol.gap, || {
        format!("objectives {} vs {}", a.objective, b.objective)
    });
    let served: Vec<(usize, usize, f64)> = dis
        .index
        .vars
        .iter()
        .enumerate()
        .filter_map(|(k, v)| match *v {
            VarKind::DisaggLoad { node, t } => Some((node, t, b.primal[k])),
            _ => None,
        })
        .collect();
    if served.is_empty() {
        rec.note("no links: both formulations coincide");
        return Ok(rec);
    }
    if b.diagnostics.primal_degenerate() {
        rec.note("disaggregated optimum is not unique; objectives compared only");
        return Ok(rec);
    }
    let owner = &s.virtual_links[0].owner;
    let j = s.demand_index(owner).expect("validated");
    let hub = s.node_index(&s.demands[j].node).expect("validated");
    for (node, t, want) in served {
        let got = if node == hub {
            let sent: f64 = (0..s.virtual_links.len())
                .map(|v| a.primal[vl.index.shift(v).expect("shift column")])
                .sum();
            a.primal[vl.index.demand(j, t).expect("demand column")] - sent
        } else {
            let v = s
                .virtual_links
                .iter()
                .position(|l| l.rec.node == s.nodes[node])
                .expect("a link per node");
            a.primal[vl.index.shift(v).expect("shift column")]
        };
        rec.observe((got - want).abs(), tol.price, || {
            format!("served at {}: {got} vs {want}", s.nodes[node])
        });
    }
    Ok(rec)
}

fn check_prices(s: &Scenario, pr: &Prices) -> Result<(), DualError> {
    let shape_ok = |m: &Vec<Vec<f64>>| m.len() == s.nodes.len() && m.iter().all(|r| r.len() == s.horizon);
    if !shape_ok(&pr.pi) {
        return Err(DualError::Dimension("π"));
    }
    if !shape_ok(&pr.omega_l) || !shape_ok(&pr.omega_u) {
        return Err(DualError::Dimension("ω"));
    }
    for n in 0..s.nodes.len() {
        for t in 0..s.horizon {
            if pr.omega_l[n][t] < 0.0 || pr.omega_u[n][t] < 0.0 {
                return Err(DualError::NegativeOmega);
            }
            let cap = s.computing_cap_at(&s.nodes[n], t + 1);
            if cap.is_infinite() && pr.omega_u[n][t] != 0.0 {
                return Err(DualError::UnboundedOmega {
                    node: s.nodes[n].clone(),
                    time: t + 1,
                });
            }
        }
    }
    Ok(())
}

fn flow_optimum(s: &Scenario, pr: &Prices, t: usize) -> Result<f64, DualError> {
    if s.lines.is_empty() {
        return Ok(0.0);
    }
    let prices: Vec<f64> = (0..s.nodes.len()).map(|n| pr.pi[n][t]).collect();
    let sub = solve_subproblem_flows(s, t + 1, &prices)?;
    if sub.status != Status::Optimal {
        return Err(DualError::Subproblem(sub.status));
    }
    Ok(sub.profit)
}

/// Lagrangian dual function of the clearing LP at `(π, ω)`: minus the sum of
/// every player's optimal profit at those prices, minus the computing-cap
/// charge. Ramp-limited suppliers contribute their optimal horizon profit.
/// At any prices the value is at most the optimal clearing objective.
pub fn eval_dual_function(s: &Scenario, pr: &Prices) -> Result<f64, DualError> {
    check_prices(s, pr)?;
    let mut profit = 0.0;
    for (j, d) in s.demands.iter().enumerate() {
        let _ = j;
        let n = s.node_index(&d.node).expect("validated");
        for t in 0..s.horizon {
            profit += pos(d.price[t] - pr.pi_hat(n, t)) * d.capacity[t];
        }
    }
    for (i, p) in s.suppliers.iter().enumerate() {
        let n = s.node_index(&p.node).expect("validated");
        if ramp_limited(s, i) {
            profit += supplier_horizon_optimum(s, i, &pr.pi[n])?;
        } else {
            for t in 0..s.horizon {
                profit += pos(pr.pi[n][t] - p.price[t]) * p.capacity[t];
            }
        }
    }
    for t in 0..s.horizon {
        profit += flow_optimum(s, pr, t)?;
    }
    for (v, link) in s.virtual_links.iter().enumerate() {
        profit += pos(link_gap(s, pr, v)) * link.capacity;
    }
    let mut charge = 0.0;
    for n in 0..s.nodes.len() {
        for t in 0..s.horizon {
            if pr.omega_u[n][t] != 0.0 {
                charge += pr.omega_u[n][t] * s.computing_cap_at(&s.nodes[n], t + 1);
            }
        }
    }
    Ok(-profit - charge)
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn new(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    /// Distance from `x` to the interval.
    pub fn distance(&self, x: f64) -> f64 {
        pos(self.lo - x).max(pos(x - self.hi))
    }
}

impl core::ops::Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }
}

/// Subdifferential in `x` of `max(x - a, 0) * scale`, `scale >= 0`.
fn hinge(x: f64, a: f64, scale: f64) -> Interval {
    if x > a + TIE_TOL {
        Interval::point(scale)
    } else if x < a - TIE_TOL {
        Interval::ZERO
    } else {
        Interval::new(0.0, scale)
    }
}

/// Breakdown of [`subgradient_interval`] by player class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgradientTerms {
    pub demand: Interval,
    pub supplier: Interval,
    pub link: Interval,
    pub flow: Interval,
}

impl SubgradientTerms {
    pub fn total(&self) -> Interval {
        self.demand + self.supplier + self.link + self.flow
    }
}

/// One-sided difference quotients of `f` at `x` in both directions. For a
/// convex piecewise-linear `f` they enclose the subdifferential.
fn bracket(mut f: impl FnMut(f64) -> Result<f64, DualError>, x: f64) -> Result<Interval, DualError> {
    let f0 = f(x)?;
    let right = (f(x + FD_STEP)? - f0) / FD_STEP;
    let left = (f0 - f(x - FD_STEP)?) / FD_STEP;
    Ok(Interval::new(left, right))
}

/// Subdifferential, in `π` at space-time node `at`, of the total optimal
/// player profit, the convex function whose negation is the dual function.
/// Optimal prices are exactly those where the interval contains 0.
///
/// Demand, plain supplier and link terms follow the piecewise cases with
/// ties at [`TIE_TOL`]. The flow term and ramp-limited supplier terms are
/// bracketed by one-sided differences with step [`FD_STEP`].
pub fn subgradient_terms(
    s: &Scenario,
    pr: &Prices,
    at: (usize, usize),
) -> Result<SubgradientTerms, DualError> {
    check_prices(s, pr)?;
    let (n, t) = at;
    if n >= s.nodes.len() || t >= s.horizon {
        return Err(DualError::Dimension("space-time node"));
    }
    let node = &s.nodes[n];
    let mut terms = SubgradientTerms {
        demand: Interval::ZERO,
        supplier: Interval::ZERO,
        link: Interval::ZERO,
        flow: Interval::ZERO,
    };
    for d in s.demands.iter().filter(|d| &d.node == node) {
        // max(α - π̂, 0) d̄ has slope -d̄ in π when π̂ < α
        let h = hinge(-pr.pi_hat(n, t), -d.price[t], d.capacity[t]);
        terms.demand = terms.demand + Interval::new(-h.lo, -h.hi);
    }
    for (i, p) in s.suppliers.iter().enumerate().filter(|(_, p)| &p.node == node) {
        if ramp_limited(s, i) {
            let mut pi = pr.pi[n].clone();
            let g = bracket(
                |x| {
                    pi[t] = x;
                    supplier_horizon_optimum(s, i, &pi)
                },
                pr.pi[n][t],
            )?;
            terms.supplier = terms.supplier + g;
        } else {
            terms.supplier = terms.supplier + hinge(pr.pi[n][t], p.price[t], p.capacity[t]);
        }
    }
    for (v, link) in s.virtual_links.iter().enumerate() {
        let ((an, at_), (bn, bt)) = link_ends(s, v);
        let h = hinge(link_gap(s, pr, v), 0.0, link.capacity);
        if (an, at_) == (n, t) {
            terms.link = terms.link + h;
        }
        if (bn, bt) == (n, t) {
            terms.link = terms.link + Interval::new(-h.lo, -h.hi);
        }
    }
    if !s.lines.is_empty() {
        let mut shifted = pr.clone();
        terms.flow = bracket(
            |x| {
                shifted.pi[n][t] = x;
                flow_optimum(s, &shifted, t)
            },
            pr.pi[n][t],
        )?;
    }
    Ok(terms)
}

/// Sum of [`subgradient_terms`].
pub fn subgradient_interval(s: &Scenario, pr: &Prices, at: (usize, usize)) -> Result<Interval, DualError> {
    Ok(subgradient_terms(s, pr, at)?.total())
}

/// The dual function at the returned duals equals the optimal objective.
pub fn check_dual_function(s: &Scenario, c: &ClearingSolution, tol: &Tolerances) -> CheckRecord {
    let name = CheckName::DualFunction;
    if let Some(r) = not_optimal(name, c) {
        return r;
    }
    let mut rec = CheckRecord::new(name);
    match eval_dual_function(s, &c.prices) {
        Ok(dv) => rec.observe((dv - c.objective).abs(), tol.price, || {
            format!("D(π*, ω*) = {dv} vs optimum {}", c.objective)
        }),
        Err(e) => rec.observe(f64::INFINITY, tol.price, || e.to_string()),
    }
    rec
}

/// Zero lies in the subgradient interval at every space-time node.
pub fn check_subgradients(s: &Scenario, c: &ClearingSolution, tol: &Tolerances) -> CheckRecord {
    let name = CheckName::Subgradient;
    if let Some(r) = not_optimal(name, c) {
        return r;
    }
    let mut rec = CheckRecord::new(name);
    for n in 0..s.nodes.len() {
        for t in 0..s.horizon {
            match subgradient_interval(s, &c.prices, (n, t)) {
                Ok(g) => rec.observe(g.distance(0.0), tol.price, || {
                    format!("({},{}): interval [{}, {}]", s.nodes[n], t + 1, g.lo, g.hi)
                }),
                Err(e) => rec.observe(f64::INFINITY, tol.price, || e.to_string()),
            }
        }
    }
    rec
}
