//! Payments, revenues and profits at cleared prices.
//!
//! Cash changes hands at the nodal prices π. The computing-capacity duals
//! only enter profits, through the adjusted price π̂ = π + ω that data-center
//! load and load shifts face.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clearing::{Allocation, ClearingSolution, Prices};
use crate::model::Scenario;
use crate::solver::Status;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSettlement {
    pub id: String,
    /// Payment made (demands) or revenue received (everyone else).
    pub cash: f64,
    pub profit: f64,
    pub profit_by_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSettlement {
    pub line: String,
    pub forward: bool,
    pub revenue: f64,
    pub profit: f64,
    pub profit_by_time: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSettlement {
    pub id: String,
    /// `(π_snd - π_rec) δ`.
    pub revenue: f64,
    /// `(π̂_snd - π̂_rec - α^δ) δ`.
    pub profit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub load_payment: f64,
    pub supplier_revenue: f64,
    pub transmission_revenue: f64,
    pub vlink_revenue: f64,
    pub total_revenue: f64,
    pub demand_profit: f64,
    pub supplier_profit: f64,
    pub transmission_profit: f64,
    pub vlink_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub pi: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    pub pi_hat: Vec<Vec<f64>>,
    pub demands: Vec<PlayerSettlement>,
    pub suppliers: Vec<PlayerSettlement>,
    pub edges: Vec<EdgeSettlement>,
    /// Per physical line, `Σ_t |π_rec - π_snd| |f_l|` as revenue.
    pub lines: Vec<PlayerSettlement>,
    pub links: Vec<LinkSettlement>,
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SettlementError {
    #[error("solution status is {0}, not optimal")]
    NotOptimal(Status),
    #[error("allocation dimensions do not match the scenario: {0}")]
    Dimension(&'static str),
}

fn check_dims(s: &Scenario, a: &Allocation) -> Result<(), SettlementError> {
    let t = s.horizon;
    let rows_ok = |v: &Vec<Vec<f64>>, n: usize| v.len() == n && v.iter().all(|r| r.len() == t);
    if !rows_ok(&a.d, s.demands.len()) {
        return Err(SettlementError::Dimension("demand allocation"));
    }
    if !rows_ok(&a.p, s.suppliers.len()) {
        return Err(SettlementError::Dimension("supply allocation"));
    }
    if a.f.len() != s.lines.len() || a.f.iter().any(|r| r.len() != t) {
        return Err(SettlementError::Dimension("flow allocation"));
    }
    if a.delta.len() != s.virtual_links.len() {
        return Err(SettlementError::Dimension("shift allocation"));
    }
    Ok(())
}

/// Social surplus `Σα^d d - Σα^p p - Σα^f f - Σα^δ δ` of an allocation.
pub fn surplus(s: &Scenario, a: &Allocation) -> Result<f64, SettlementError> {
    check_dims(s, a)?;
    let mut phi = 0.0;
    for (d, x) in s.demands.iter().zip(&a.d) {
        phi += d.price.iter().zip(x).map(|(p, v)| p * v).sum::<f64>();
    }
    for (g, x) in s.suppliers.iter().zip(&a.p) {
        phi -= g.price.iter().zip(x).map(|(p, v)| p * v).sum::<f64>();
    }
    for (l, x) in s.lines.iter().zip(&a.f) {
        phi -= l.price * x.iter().map(|e| e[0] + e[1]).sum::<f64>();
    }
    for (v, x) in s.virtual_links.iter().zip(&a.delta) {
        phi -= v.price * x;
    }
    Ok(phi)
}

/// Settles a cleared market.
pub fn settle(s: &Scenario, c: &ClearingSolution) -> Result<Settlement, SettlementError> {
    if c.status != Status::Optimal {
        return Err(SettlementError::NotOptimal(c.status));
    }
    settle_at(s, &c.allocation, &c.prices)
}

/// Settles an arbitrary allocation at arbitrary prices.
pub fn settle_at(s: &Scenario, a: &Allocation, pr: &Prices) -> Result<Settlement, SettlementError> {
    check_dims(s, a)?;
    let t_len = s.horizon;
    let nn = s.nodes.len();
    let node = |x: &str| s.node_index(x).expect("validated node");
    let omega: Vec<Vec<f64>> = (0..nn)
        .map(|n| (0..t_len).map(|ti| pr.omega(n, ti)).collect())
        .collect();
    let pi_hat: Vec<Vec<f64>> = (0..nn)
        .map(|n| (0..t_len).map(|ti| pr.pi_hat(n, ti)).collect())
        .collect();
    let mut totals = Totals::default();

    let mut demands = Vec::with_capacity(s.demands.len());
    for (j, d) in s.demands.iter().enumerate() {
        let n = node(&d.node);
        let mut cash = 0.0;
        let mut by_t = Vec::with_capacity(t_len);
        for ti in 0..t_len {
            let q = a.d[j][ti];
            cash += pr.pi[n][ti] * q;
            by_t.push((d.price[ti] - pi_hat[n][ti]) * q);
        }
        let profit = by_t.iter().sum();
        totals.load_payment += cash;
        totals.demand_profit += profit;
        demands.push(PlayerSettlement {
            id: d.id.clone(),
            cash,
            profit,
            profit_by_time: by_t,
        });
    }

    let mut suppliers = Vec::with_capacity(s.suppliers.len());
    for (i, g) in s.suppliers.iter().enumerate() {
        let n = node(&g.node);
        let mut cash = 0.0;
        let mut by_t = Vec::with_capacity(t_len);
        for ti in 0..t_len {
            let q = a.p[i][ti];
            cash += pr.pi[n][ti] * q;
            by_t.push((pr.pi[n][ti] - g.price[ti]) * q);
        }
        let profit = by_t.iter().sum();
        totals.supplier_revenue += cash;
        totals.supplier_profit += profit;
        suppliers.push(PlayerSettlement {
            id: g.id.clone(),
            cash,
            profit,
            profit_by_time: by_t,
        });
    }

    let mut edges = Vec::with_capacity(2 * s.lines.len());
    let mut lines = Vec::with_capacity(s.lines.len());
    for (l, line) in s.lines.iter().enumerate() {
        let (sn, rn) = (node(&line.snd), node(&line.rec));
        let mut line_cash = 0.0;
        let mut line_by_t = alloc::vec![0.0; t_len];
        for (e, forward) in [(0usize, true), (1, false)] {
            let (from, to) = if forward { (sn, rn) } else { (rn, sn) };
            let mut cash = 0.0;
            let mut by_t = Vec::with_capacity(t_len);
            for ti in 0..t_len {
                let q = a.f[l][ti][e];
                let gap = pr.pi[to][ti] - pr.pi[from][ti];
                cash += gap * q;
                let p = (gap - line.price) * q;
                by_t.push(p);
                line_by_t[ti] += p;
            }
            let profit: f64 = by_t.iter().sum();
            totals.transmission_revenue += cash;
            totals.transmission_profit += profit;
            edges.push(EdgeSettlement {
                line: line.id.clone(),
                forward,
                revenue: cash,
                profit,
                profit_by_time: by_t,
            });
        }
        for ti in 0..t_len {
            line_cash += (pr.pi[rn][ti] - pr.pi[sn][ti]).abs() * a.net_flow(l, ti).abs();
        }
        lines.push(PlayerSettlement {
            id: line.id.clone(),
            cash: line_cash,
            profit: line_by_t.iter().sum(),
            profit_by_time: line_by_t,
        });
    }

    let mut links = Vec::with_capacity(s.virtual_links.len());
    for (v, link) in s.virtual_links.iter().enumerate() {
        let (sn, st) = (node(&link.snd.node), link.snd.time - 1);
        let (rn, rt) = (node(&link.rec.node), link.rec.time - 1);
        let q = a.delta[v];
        let revenue = (pr.pi[sn][st] - pr.pi[rn][rt]) * q;
        let profit = (pi_hat[sn][st] - pi_hat[rn][rt] - link.price) * q;
        totals.vlink_revenue += revenue;
        totals.vlink_profit += profit;
        links.push(LinkSettlement {
            id: link.id.clone(),
            revenue,
            profit,
        });
    }
    totals.total_revenue =
        totals.supplier_revenue + totals.transmission_revenue + totals.vlink_revenue;

    Ok(Settlement {
        pi: pr.pi.clone(),
        omega,
        pi_hat,
        demands,
        suppliers,
        edges,
        lines,
        links,
        totals,
    })
}
