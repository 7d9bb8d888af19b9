use alloc::vec;
use alloc::vec::Vec;

use super::{solve, SolveError, Status};
use crate::builder::build_flow_set;
use crate::model::Scenario;

/// Optimal transmission profit at fixed prices, and a maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSubproblem {
    pub status: Status,
    /// `max Σ_k (π_rec(k) - π_snd(k) - α^f_k) f_k` over the feasible flows.
    pub profit: f64,
    /// Directed-edge flows, indexed `[line][0 = forward, 1 = backward]`.
    pub flows: Vec<[f64; 2]>,
}

/// Solves the transmission provider's problem at one time with nodal prices
/// `prices` (indexed like `scenario.nodes`). Line data does not vary with
/// time, so `t` only selects which prices the caller passes.
pub fn solve_subproblem_flows(
    scenario: &Scenario,
    _t: usize,
    prices: &[f64],
) -> Result<FlowSubproblem, SolveError> {
    let (mut lp, cols) = build_flow_set(scenario);
    let mut ends = Vec::with_capacity(scenario.lines.len());
    for l in &scenario.lines {
        let a = scenario.node_index(&l.snd).expect("validated");
        let b = scenario.node_index(&l.rec).expect("validated");
        ends.push((a, b));
    }
    for (j, c) in cols.iter().enumerate() {
        if let Some((l, forward)) = *c {
            let (a, b) = ends[l];
            let (from, to) = if forward { (a, b) } else { (b, a) };
            // minimize the negated profit
            lp.objective[j] = -(prices[to] - prices[from] - scenario.lines[l].price);
        }
    }
    let sol = solve(&lp)?;
    let mut flows = vec![[0.0; 2]; scenario.lines.len()];
    if sol.status != Status::Optimal {
        return Ok(FlowSubproblem {
            status: sol.status,
            profit: f64::INFINITY,
            flows,
        });
    }
    for (j, c) in cols.iter().enumerate() {
        if let Some((l, forward)) = *c {
            flows[l][usize::from(!forward)] = sol.primal[j];
        }
    }
    Ok(FlowSubproblem {
        status: Status::Optimal,
        profit: -sol.objective,
        flows,
    })
}
