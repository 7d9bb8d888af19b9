//! Instance families: capacity sweeps, nested link chains and price
//! statistics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clearing::{clear, ClearError, ClearingSolution};
use crate::model::Scenario;
use crate::solver::Status;
use crate::verify::{CheckRecord, CheckStatus};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptKind {
    Link,
    Line,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub capacity: f64,
    pub surplus: f64,
    /// Links: `π̂_snd - π̂_rec`. Lines: `π_rec - π_snd` summed over time.
    pub gap: f64,
    /// Links: `gap - α^δ`. Lines: the gap less the line price.
    pub unit_profit: f64,
    /// Links: δ. Lines: net flow summed over time.
    pub flow: f64,
    /// Slack on both sides of the swept capacity.
    pub interior: bool,
    /// `[node][t - 1]`.
    pub pi: Vec<Vec<f64>>,
    pub pi_hat: Vec<Vec<f64>>,
    pub degenerate_basics: usize,
    pub zero_reduced_cost_nonbasics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub entity: String,
    pub kind: SweptKind,
    pub base_capacity: f64,
    pub grid: Vec<f64>,
    /// The unswept instance, then one point per grid value.
    pub base: SweepPoint,
    pub points: Vec<SweepPoint>,
    /// Capacity relations checked along a link sweep; empty for lines.
    pub checks: Vec<CheckRecord>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("no virtual link or line with id {0}")]
    UnknownEntity(String),
    #[error("grid must be nonnegative and strictly increasing")]
    Grid,
    #[error("solve at eps {eps} is {status}")]
    NotOptimal { eps: f64, status: Status },
    #[error(transparent)]
    Clear(#[from] ClearError),
    #[error("chain step {step} is not nested: {reason}")]
    NotNested { step: usize, reason: String },
    #[error("empty input")]
    Empty,
}

/// Link capacity relations along a sweep, in reporting order.
pub const SWEEP_CHECKS: [&str; 3] = ["uncongested_constant", "unit_profit_monotone", "slack_bound"];

fn point(s: &Scenario, kind: SweptKind, k: usize, eps: f64, cap: f64, c: &ClearingSolution, tol: &Tolerances) -> SweepPoint {
    let h = s.horizon;
    let pr = &c.prices;
    let pi_hat: Vec<Vec<f64>> = (0..s.nodes.len())
        .map(|n| (0..h).map(|t| pr.pi_hat(n, t)).collect())
        .collect();
    let (gap, unit_profit, flow) = match kind {
        SweptKind::Link => {
            let v = &s.virtual_links[k];
            let a = s.st_of(&v.snd).expect("validated");
            let b = s.st_of(&v.rec).expect("validated");
            let gap = pi_hat[a / h][a % h] - pi_hat[b / h][b % h];
            (gap, gap - v.price, c.allocation.delta[k])
        }
        SweptKind::Line => {
            let l = &s.lines[k];
            let a = s.node_index(&l.snd).expect("validated");
            let b = s.node_index(&l.rec).expect("validated");
            let gap: f64 = (0..h).map(|t| pr.pi[b][t] - pr.pi[a][t]).sum();
            let flow: f64 = (0..h).map(|t| c.allocation.net_flow(k, t)).sum();
            (gap, gap - l.price * h as f64, flow)
        }
    };
    let interior = match kind {
        SweptKind::Link => flow > tol.cleared && flow < cap - tol.cleared,
        SweptKind::Line => (0..h).all(|t| c.allocation.net_flow(k, t).abs() < cap - tol.cleared),
    };
    SweepPoint {
        eps,
        capacity: cap,
        surplus: c.surplus(),
        gap,
        unit_profit,
        flow,
        interior,
        pi: pr.pi.clone(),
        pi_hat,
        degenerate_basics: c.diagnostics.degenerate_basics,
        zero_reduced_cost_nonbasics: c.diagnostics.zero_reduced_cost_nonbasics,
    }
}

/// Re-solves `s` with the capacity of link or line `id` raised by each `eps`
/// in `grid`. For a link the report checks that a link with slack keeps a
/// constant unit profit, that the unit profit never rises with capacity, and
/// that once the link has slack the gap is at most its bid. A violation seen
/// with several optimal duals is reported as inconclusive.
pub fn capacity_sweep(s: &Scenario, id: &str, grid: &[f64], tol: &Tolerances) -> Result<SweepReport, SweepError> {
    if grid.iter().any(|e| !e.is_finite() || *e < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::Grid);
    }
    let (kind, k, base_cap) = if let Some(k) = s.link_index(id) {
        (SweptKind::Link, k, s.virtual_links[k].capacity)
    } else if let Some(k) = s.line_index(id) {
        (SweptKind::Line, k, s.lines[k].flow_cap)
    } else {
        return Err(SweepError::UnknownEntity(id.into()));
    };
    let solve_at = |eps: f64| -> Result<SweepPoint, SweepError> {
        let mut sc = s.clone();
        let cap = base_cap + eps;
        match kind {
            SweptKind::Link => sc.virtual_links[k].capacity = cap,
            SweptKind::Line => sc.lines[k].flow_cap = cap,
        }
        let c = clear(&sc)?;
        if c.status != Status::Optimal {
            return Err(SweepError::NotOptimal { eps, status: c.status });
        }
        Ok(point(&sc, kind, k, eps, cap, &c, tol))
    };
    let base = solve_at(0.0)?;
    let points = grid.iter().map(|&e| solve_at(e)).collect::<Result<Vec<_>, _>>()?;
    let checks = match kind {
        SweptKind::Link => link_checks(&base, &points, tol),
        SweptKind::Line => Vec::new(),
    };
    Ok(SweepReport {
        entity: id.into(),
        kind,
        base_capacity: base_cap,
        grid: grid.to_vec(),
        base,
        points,
        checks,
    })
}

fn record(name: &str) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: CheckStatus::Pass,
        max_residual: 0.0,
        details: Vec::new(),
    }
}

/// Marks a violation; a violation at a dual-degenerate point is inconclusive
/// unless a clean failure was already seen.
fn violate(r: &mut CheckRecord, residual: f64, degenerate: bool, what: String) {
    r.max_residual = r.max_residual.max(residual);
    if degenerate {
        if r.status == CheckStatus::Pass {
            r.status = CheckStatus::DegenerateInconclusive;
        }
        r.details.push(format!("{what}; several optimal duals exist"));
    } else {
        r.status = CheckStatus::Fail;
        r.details.push(what);
    }
}

fn degenerate(p: &SweepPoint) -> bool {
    p.degenerate_basics > 0
}

fn link_checks(base: &SweepPoint, points: &[SweepPoint], tol: &Tolerances) -> Vec<CheckRecord> {
    let slack = tol.price;
    let mut constant = record(SWEEP_CHECKS[0]);
    if base.flow < base.capacity - tol.cleared {
        for p in points {
            let d = (p.unit_profit - base.unit_profit).abs();
            if d > slack {
                violate(&mut constant, d, degenerate(p) || degenerate(base), format!(
                    "eps {}: unit profit {} differs from uncongested base {}",
                    p.eps, p.unit_profit, base.unit_profit
                ));
            }
        }
    } else {
        constant.status = CheckStatus::Skipped;
        constant.details.push("base link is at capacity".into());
    }

    let mut monotone = record(SWEEP_CHECKS[1]);
    let series: Vec<&SweepPoint> = core::iter::once(base).chain(points).collect();
    for w in series.windows(2) {
        let rise = w[1].unit_profit - w[0].unit_profit;
        if rise > slack {
            violate(&mut monotone, rise, degenerate(w[0]) || degenerate(w[1]), format!(
                "unit profit rises from {} at eps {} to {} at eps {}",
                w[0].unit_profit, w[0].eps, w[1].unit_profit, w[1].eps
            ));
        }
    }

    let mut bound = record(SWEEP_CHECKS[2]);
    match series.iter().position(|p| p.flow < p.capacity - tol.cleared) {
        Some(first) => {
            for p in &series[first..] {
                if p.unit_profit > slack {
                    violate(&mut bound, p.unit_profit, degenerate(p), format!(
                        "eps {}: gap {} exceeds the link bid by {}",
                        p.eps, p.gap, p.unit_profit
                    ));
                }
            }
        }
        None => {
            bound.status = CheckStatus::Skipped;
            bound.details.push("link saturated at every grid point".into());
        }
    }
    alloc::vec![constant, monotone, bound]
}

fn same_except_links(a: &Scenario, b: &Scenario) -> bool {
    let mut a = a.clone();
    let mut b = b.clone();
    a.virtual_links.clear();
    b.virtual_links.clear();
    a == b
}

/// Why `next` does not enlarge `prev`, if it does not.
pub fn nesting_violation(prev: &Scenario, next: &Scenario) -> Option<String> {
    if !same_except_links(prev, next) {
        return Some("scenarios differ outside their virtual links".into());
    }
    for v in &prev.virtual_links {
        let Some(w) = next.virtual_links.iter().find(|w| w.id == v.id) else {
            return Some(format!("link {} is dropped", v.id));
        };
        if w.snd != v.snd || w.rec != v.rec || w.price != v.price || w.owner != v.owner {
            return Some(format!("link {} changes other than in capacity", v.id));
        }
        if w.capacity < v.capacity {
            return Some(format!("link {} shrinks", v.id));
        }
    }
    None
}

/// Solves every scenario of a nested chain and checks that the optimal
/// objective never rises (surplus never falls) by more than `tol.gap`.
/// Returns the record and the surplus of each step.
pub fn surplus_monotonicity(chain: &[Scenario], tol: &Tolerances) -> Result<(CheckRecord, Vec<f64>), SweepError> {
    if chain.is_empty() {
        return Err(SweepError::Empty);
    }
    for (step, w) in chain.windows(2).enumerate() {
        if let Some(reason) = nesting_violation(&w[0], &w[1]) {
            return Err(SweepError::NotNested { step: step + 1, reason });
        }
    }
    let mut surplus = Vec::with_capacity(chain.len());
    for (i, s) in chain.iter().enumerate() {
        let c = clear(s)?;
        if c.status != Status::Optimal {
            return Err(SweepError::NotOptimal { eps: i as f64, status: c.status });
        }
        surplus.push(c.surplus());
    }
    let mut r = record("surplus_monotonicity");
    for (i, w) in surplus.windows(2).enumerate() {
        let drop = w[0] - w[1];
        r.max_residual = r.max_residual.max(drop.max(0.0));
        if drop > tol.gap {
            r.status = CheckStatus::Fail;
            r.details.push(format!("surplus falls from {} to {} at step {}", w[0], w[1], i + 1));
        }
    }
    Ok((r, surplus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmpStats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    /// Mean absolute deviation about the mean.
    pub avg_dev: f64,
}

/// Summary statistics of a price vector.
pub fn lmp_stats(prices: &[f64]) -> Result<LmpStats, SweepError> {
    if prices.is_empty() {
        return Err(SweepError::Empty);
    }
    let n = prices.len() as f64;
    let mut sorted = prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let mean = prices.iter().sum::<f64>() / n;
    let var = prices.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
    let avg_dev = prices.iter().map(|p| (p - mean).abs()).sum::<f64>() / n;
    Ok(LmpStats {
        mean,
        median,
        max: sorted[m - 1],
        min: sorted[0],
        std_dev: libm::sqrt(var),
        avg_dev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges; the last bin includes its right edge.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over the range of `values`. A constant vector gets
/// one unit-wide bin centred on the value.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram, SweepError> {
    if values.is_empty() || bins == 0 {
        return Err(SweepError::Empty);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(Histogram {
            edges: alloc::vec![lo - 0.5, lo + 0.5],
            counts: alloc::vec![values.len()],
        });
    }
    let w = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + w * k as f64 }).collect();
    let mut counts = alloc::vec![0; bins];
    for &v in values {
        let k = (((v - lo) / w) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}
