//! LP solving behind a small backend trait, plus the transmission
//! subproblem solved at fixed prices.

mod flows;
mod simplex;

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lp::LinearProgram;

pub use flows::{solve_subproblem_flows, FlowSubproblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    Fixed,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotRule {
    Dantzig,
    Bland,
}

/// Optimality evidence computed from the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktCertificate {
    pub primal_residual: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub dual_objective: f64,
    /// `|cᵀx - dual objective|`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub phase1_iterations: usize,
    pub refactorizations: usize,
    pub singular_repairs: usize,
    pub bland_engaged: bool,
    /// Basic structurals or logicals sitting on a bound (primal degeneracy,
    /// which allows more than one optimal dual).
    pub degenerate_basics: usize,
    /// Nonbasic columns with zero reduced cost (alternative primal optima).
    pub zero_reduced_cost_nonbasics: usize,
}

impl SolveDiagnostics {
    pub fn dual_degenerate(&self) -> bool {
        self.degenerate_basics > 0
    }

    pub fn primal_degenerate(&self) -> bool {
        self.zero_reduced_cost_nonbasics > 0
    }
}

/// Solver output. Row duals follow `L = cᵀx - Σ yᵢ (aᵢx - bᵢ)`: a `>=` row
/// has `y >= 0`, a `<=` row has `y <= 0`, and an equality row is free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualSolution {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis: Vec<BasisStatus>,
    pub row_basis: Vec<BasisStatus>,
    pub certificate: KktCertificate,
    pub diagnostics: SolveDiagnostics,
}

impl PrimalDualSolution {
    pub fn infeasible() -> Self {
        Self {
            status: Status::Infeasible,
            objective: f64::INFINITY,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            basis: Vec::new(),
            row_basis: Vec::new(),
            certificate: KktCertificate::default(),
            diagnostics: SolveDiagnostics::default(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(
        "iteration limit {iterations} reached under {rule:?} pricing after {consecutive_degenerate} consecutive degenerate pivots"
    )]
    IterationLimit {
        iterations: usize,
        rule: PivotRule,
        consecutive_degenerate: usize,
    },
    #[error("malformed LP: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
    pub refactor_interval: usize,
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub phase1_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1_000_000,
            stall_threshold: 200,
            refactor_interval: 100,
            pivot_tol: 1e-9,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            phase1_tol: 1e-7,
        }
    }
}

/// Anything able to solve a [`LinearProgram`] with row duals.
pub trait LpBackend {
    fn solve(&self, lp: &LinearProgram) -> Result<PrimalDualSolution, SolveError>;
}

/// The built-in primal simplex.
#[derive(Debug, Clone, Default)]
pub struct PrimalSimplex {
    pub options: SolverOptions,
}

impl LpBackend for PrimalSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<PrimalDualSolution, SolveError> {
        check_shape(lp)?;
        simplex::solve(lp, &self.options)
    }
}

fn check_shape(lp: &LinearProgram) -> Result<(), SolveError> {
    let n = lp.num_cols();
    if lp.lower.len() != n || lp.upper.len() != n {
        return Err(SolveError::Malformed("bound vectors differ in length from objective"));
    }
    for r in &lp.rows {
        if !r.rhs.is_finite() {
            return Err(SolveError::Malformed("row right-hand side is not finite"));
        }
        for &(j, a) in &r.coeffs {
            if j >= n {
                return Err(SolveError::Malformed("row references a missing column"));
            }
            if !a.is_finite() {
                return Err(SolveError::Malformed("coefficient is not finite"));
            }
        }
    }
    if lp.objective.iter().any(|c| !c.is_finite()) {
        return Err(SolveError::Malformed("objective coefficient is not finite"));
    }
    Ok(())
}

/// Solves `lp` with the default backend.
pub fn solve(lp: &LinearProgram) -> Result<PrimalDualSolution, SolveError> {
    PrimalSimplex::default().solve(lp)
}
