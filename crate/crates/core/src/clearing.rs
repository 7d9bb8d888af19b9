//! Cleared allocation and prices read back from a solved clearing LP.
//!
//! Per-time arrays are indexed `[entity][t - 1]`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::builder::{build, BuildError, LpInstance};
use crate::model::Scenario;
use crate::solver::{
    KktCertificate, LpBackend, PrimalDualSolution, PrimalSimplex, SolveDiagnostics, SolveError,
    Status,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub d: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    /// `[line][t - 1][0 = forward edge, 1 = backward edge]`.
    pub f: Vec<Vec<[f64; 2]>>,
    /// Empty in transport mode.
    pub theta: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
}

impl Allocation {
    pub fn zeros(s: &Scenario) -> Self {
        let t = s.horizon;
        Self {
            d: vec![vec![0.0; t]; s.demands.len()],
            p: vec![vec![0.0; t]; s.suppliers.len()],
            f: vec![vec![[0.0; 2]; t]; s.lines.len()],
            theta: Vec::new(),
            delta: vec![0.0; s.virtual_links.len()],
        }
    }

    /// Net flow on line `l` at time index `ti` (0-based), positive `snd -> rec`.
    pub fn net_flow(&self, l: usize, ti: usize) -> f64 {
        self.f[l][ti][0] - self.f[l][ti][1]
    }

    pub fn total_demand(&self) -> f64 {
        self.d.iter().flatten().sum()
    }
}

/// Nodal prices and computing-capacity duals, `[node][t - 1]`. Where a
/// computing cap is infinite both ω entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prices {
    pub pi: Vec<Vec<f64>>,
    pub omega_l: Vec<Vec<f64>>,
    pub omega_u: Vec<Vec<f64>>,
}

impl Prices {
    pub fn zeros(nodes: usize, horizon: usize) -> Self {
        Self {
            pi: vec![vec![0.0; horizon]; nodes],
            omega_l: vec![vec![0.0; horizon]; nodes],
            omega_u: vec![vec![0.0; horizon]; nodes],
        }
    }

    /// `ω = ω^u - ω^l`.
    pub fn omega(&self, n: usize, ti: usize) -> f64 {
        self.omega_u[n][ti] - self.omega_l[n][ti]
    }

    /// `π̂ = π + ω`.
    pub fn pi_hat(&self, n: usize, ti: usize) -> f64 {
        self.pi[n][ti] + self.omega(n, ti)
    }

    pub fn flat_pi(&self) -> Vec<f64> {
        self.pi.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearingSolution {
    pub status: Status,
    /// Optimal value of the minimization (negative social surplus).
    pub objective: f64,
    pub allocation: Allocation,
    pub prices: Prices,
    pub certificate: KktCertificate,
    pub diagnostics: SolveDiagnostics,
}

impl ClearingSolution {
    pub fn surplus(&self) -> f64 {
        -self.objective
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClearError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Maps solver output back onto scenario entities.
pub fn extract(s: &Scenario, inst: &LpInstance, sol: &PrimalDualSolution) -> ClearingSolution {
    let nn = s.nodes.len();
    let t_len = s.horizon;
    let mut allocation = Allocation::zeros(s);
    let mut prices = Prices::zeros(nn, t_len);
    if sol.status != Status::Optimal {
        return ClearingSolution {
            status: sol.status,
            objective: sol.objective,
            allocation,
            prices,
            certificate: sol.certificate,
            diagnostics: sol.diagnostics,
        };
    }
    let x = &sol.primal;
    let ix = &inst.index;
    for j in 0..s.demands.len() {
        for t in 1..=t_len {
            if let Some(c) = ix.demand(j, t) {
                allocation.d[j][t - 1] = x[c];
            }
        }
    }
    for i in 0..s.suppliers.len() {
        for t in 1..=t_len {
            allocation.p[i][t - 1] = x[ix.supply(i, t).expect("supply column")];
        }
    }
    for l in 0..s.lines.len() {
        for t in 1..=t_len {
            allocation.f[l][t - 1] = [
                x[ix.flow(l, true, t).expect("flow column")],
                x[ix.flow(l, false, t).expect("flow column")],
            ];
        }
    }
    if ix.angle(0, 1).is_some() {
        allocation.theta = (0..nn)
            .map(|n| (1..=t_len).map(|t| x[ix.angle(n, t).unwrap()]).collect())
            .collect();
    }
    for v in 0..s.virtual_links.len() {
        if let Some(c) = ix.shift(v) {
            allocation.delta[v] = x[c];
        }
    }
    for n in 0..nn {
        for t in 1..=t_len {
            prices.pi[n][t - 1] = sol.dual[ix.balance(n, t).expect("balance row")];
            if let Some(r) = ix.compute_lower(n, t) {
                prices.omega_l[n][t - 1] = sol.dual[r];
            }
            if let Some(r) = ix.compute_upper(n, t) {
                prices.omega_u[n][t - 1] = -sol.dual[r];
            }
        }
    }
    ClearingSolution {
        status: sol.status,
        objective: sol.objective,
        allocation,
        prices,
        certificate: sol.certificate,
        diagnostics: sol.diagnostics,
    }
}

/// Builds, solves with `backend` and extracts.
pub fn clear_with(
    s: &Scenario,
    backend: &dyn LpBackend,
) -> Result<(LpInstance, PrimalDualSolution, ClearingSolution), ClearError> {
    let inst = build(s)?;
    let sol = backend.solve(&inst.lp)?;
    let c = extract(s, &inst, &sol);
    Ok((inst, sol, c))
}

/// Builds, solves and extracts with the built-in simplex.
pub fn clear(s: &Scenario) -> Result<ClearingSolution, ClearError> {
    Ok(clear_with(s, &PrimalSimplex::default())?.2)
}
