//! Two-phase bounded-variable primal simplex over a product-form inverse.
//!
//! Each row `i` gets a logical `r_i` with `a_i x - r_i = 0`; the row sense
//! becomes a bound on `r_i`. Rows whose starting activity lies outside those
//! bounds get an artificial column, and phase 1 drives the artificials to
//! zero. The basis inverse is kept as a diagonal start matrix followed by a
//! list of eta columns and rebuilt from scratch every `refactor_interval`
//! pivots.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    BasisStatus, KktCertificate, PivotRule, PrimalDualSolution, SolveDiagnostics, SolveError,
    SolverOptions, Status,
};
use crate::lp::{LinearProgram, Sense};

const INF: f64 = f64::INFINITY;

struct Eta {
    row: usize,
    pivot: f64,
    /// Off-pivot entries `(i, -alpha_i / alpha_r)`.
    entries: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Ratio {
    Flip,
    Pivot { row: usize, step: f64 },
    Unbounded,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    /// `pos[j]` is the basis position of `j`, or `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    b0: Vec<f64>,
    etas: Vec<Eta>,
    pivots_since_refactor: usize,
    diag: SolveDiagnostics,
    bland: bool,
    stall: usize,
}

fn dist_to_bounds(v: f64, lo: f64, hi: f64) -> f64 {
    (v - lo).abs().min((hi - v).abs())
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SolverOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let mut counts = vec![0usize; n + 1];
        for r in &lp.rows {
            for &(j, _) in &r.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut fill = counts;
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, r) in lp.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                let k = fill[j];
                col_row[k] = i;
                col_val[k] = a;
                fill[j] += 1;
            }
        }

        let mut lb = lp.lower.clone();
        let mut ub = lp.upper.clone();
        let mut x = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let v = if lb[j].is_finite() {
                lb[j]
            } else if ub[j].is_finite() {
                ub[j]
            } else {
                0.0
            };
            x.push(v);
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if x[j] != 0.0 {
                for k in col_start[j]..col_start[j + 1] {
                    activity[col_row[k]] += col_val[k] * x[j];
                }
            }
        }
        for r in &lp.rows {
            let (lo, hi) = match r.sense {
                Sense::Le => (-INF, r.rhs),
                Sense::Ge => (r.rhs, INF),
                Sense::Eq => (r.rhs, r.rhs),
            };
            lb.push(lo);
            ub.push(hi);
        }
        let mut head = vec![0usize; m];
        let mut b0 = vec![-1.0; m];
        let mut art_row = Vec::new();
        let mut art_sign = Vec::new();
        for i in 0..m {
            let a = activity[i];
            let (lo, hi) = (lb[n + i], ub[n + i]);
            if a >= lo && a <= hi {
                x.push(a);
                head[i] = n + i;
            } else {
                // logical parks at the violated bound; the artificial absorbs the gap
                let b = if a < lo { lo } else { hi };
                x.push(b);
                let s = if b > a { 1.0 } else { -1.0 };
                art_row.push(i);
                art_sign.push(s);
                b0[i] = s;
            }
        }
        let nart = art_row.len();
        let ntot = n + m + nart;
        for k in 0..nart {
            let i = art_row[k];
            lb.push(0.0);
            ub.push(INF);
            x.push((activity[i] - x[n + i]).abs());
            head[i] = n + m + k;
        }
        let mut pos = vec![usize::MAX; ntot];
        for (i, &j) in head.iter().enumerate() {
            pos[j] = i;
        }
        let mut cost = vec![0.0; ntot];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        Self {
            lp,
            opts,
            m,
            n,
            col_start,
            col_row,
            col_val,
            art_row,
            art_sign,
            lb,
            ub,
            cost,
            x,
            head,
            pos,
            b0,
            etas: Vec::new(),
            pivots_since_refactor: 0,
            diag: SolveDiagnostics::default(),
            bland: false,
            stall: 0,
        }
    }

    fn ntot(&self) -> usize {
        self.x.len()
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else if j < self.n + self.m {
            f(j - self.n, -1.0);
        } else {
            let k = j - self.n - self.m;
            f(self.art_row[k], self.art_sign[k]);
        }
    }

    fn col_nnz(&self, j: usize) -> usize {
        if j < self.n {
            self.col_start[j + 1] - self.col_start[j]
        } else {
            1
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        for (vi, d) in v.iter_mut().zip(&self.b0) {
            *vi /= d;
        }
        for e in &self.etas {
            let vr = v[e.row];
            if vr == 0.0 {
                continue;
            }
            v[e.row] = vr * e.pivot;
            for &(i, eta) in &e.entries {
                v[i] += eta * vr;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut s = y[e.row] * e.pivot;
            for &(i, eta) in &e.entries {
                s += y[i] * eta;
            }
            y[e.row] = s;
        }
        for (yi, d) in y.iter_mut().zip(&self.b0) {
            *yi /= d;
        }
    }

    fn column_ftran(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        self.for_each_entry(j, |i, a| v[i] += a);
        self.ftran(&mut v);
        v
    }

    fn push_eta(&mut self, alpha: &[f64], r: usize) {
        let ar = alpha[r];
        let mut entries = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != r && a.abs() > 1e-14 {
                entries.push((i, -a / ar));
            }
        }
        self.etas.push(Eta {
            row: r,
            pivot: 1.0 / ar,
            entries,
        });
    }

    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.btran(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        self.for_each_entry(j, |i, a| d -= y[i] * a);
        d
    }

    /// Rebuilds the eta file for the current basis and recomputes basic values.
    fn refactor(&mut self) {
        self.etas.clear();
        self.b0 = vec![-1.0; self.m];
        self.diag.refactorizations += 1;
        self.pivots_since_refactor = 0;
        let n = self.n;
        let m = self.m;
        let mut target: Vec<usize> = self
            .head
            .iter()
            .copied()
            .filter(|&j| !(j >= n && j < n + m))
            .collect();
        target.sort_by_key(|&j| (self.col_nnz(j), j));
        let mut free_row = vec![true; m];
        for &j in &self.head {
            if j >= n && j < n + m {
                free_row[j - n] = false;
            }
        }
        let mut new_head: Vec<usize> = (0..m).map(|i| n + i).collect();
        for &j in &self.head {
            self.pos[j] = usize::MAX;
        }
        for q in target {
            let alpha = self.column_ftran(q);
            let mut best = usize::MAX;
            let mut best_abs = self.opts.pivot_tol;
            for i in 0..m {
                if free_row[i] && alpha[i].abs() > best_abs {
                    best_abs = alpha[i].abs();
                    best = i;
                }
            }
            if best == usize::MAX {
                // dependent column: leave it out and keep the logical in its place
                self.diag.singular_repairs += 1;
                self.x[q] = self.nearest_bound(q);
                continue;
            }
            self.push_eta(&alpha, best);
            free_row[best] = false;
            new_head[best] = q;
        }
        self.head = new_head;
        for (i, &j) in self.head.iter().enumerate() {
            self.pos[j] = i;
        }
        self.recompute_basics();
    }

    fn nearest_bound(&self, j: usize) -> f64 {
        let v = self.x[j];
        let (lo, hi) = (self.lb[j], self.ub[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (v - lo).abs() <= (hi - v).abs() {
                    lo
                } else {
                    hi
                }
            }
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.ntot() {
            if self.pos[j] == usize::MAX && self.x[j] != 0.0 {
                let v = self.x[j];
                self.for_each_entry(j, |i, a| rhs[i] -= a * v);
            }
        }
        self.ftran(&mut rhs);
        for (i, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[i];
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.ub[j] - self.lb[j] <= 0.0
    }

    /// Entering candidate and direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64]) -> Option<(usize, f64, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ntot() {
            if self.pos[j] != usize::MAX || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j, y);
            let v = self.x[j];
            let dir = if d < -tol && v < self.ub[j] {
                1.0
            } else if d > tol && v > self.lb[j] {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir, d));
            }
            match best {
                Some((_, _, bd)) if d.abs() <= bd.abs() => {}
                _ => best = Some((j, dir, d)),
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Ratio {
        let tol = self.opts.feasibility_tol;
        let piv_tol = self.opts.pivot_tol;
        let flip = self.ub[q] - self.lb[q];
        if self.bland {
            let mut best: Option<(f64, usize)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                let rate = -dir * a;
                if rate.abs() <= piv_tol {
                    continue;
                }
                let j = self.head[i];
                let room = if rate < 0.0 {
                    self.x[j] - self.lb[j]
                } else {
                    self.ub[j] - self.x[j]
                };
                if !room.is_finite() {
                    continue;
                }
                let t = (room / rate.abs()).max(0.0);
                best = match best {
                    None => Some((t, i)),
                    Some((bt, bi)) => {
                        if t < bt || (t == bt && j < self.head[bi]) {
                            Some((t, i))
                        } else {
                            Some((bt, bi))
                        }
                    }
                };
            }
            return match best {
                Some((t, _)) if flip <= t => Ratio::Flip,
                Some((t, i)) => Ratio::Pivot { row: i, step: t },
                None if flip.is_finite() => Ratio::Flip,
                None => Ratio::Unbounded,
            };
        }

        let mut tmax = INF;
        for (i, &a) in alpha.iter().enumerate() {
            let rate = -dir * a;
            if rate.abs() <= piv_tol {
                continue;
            }
            let j = self.head[i];
            let room = if rate < 0.0 {
                self.x[j] - self.lb[j] + tol
            } else {
                self.ub[j] - self.x[j] + tol
            };
            if room.is_finite() {
                tmax = tmax.min(room.max(0.0) / rate.abs());
            }
        }
        if !tmax.is_finite() {
            return if flip.is_finite() {
                Ratio::Flip
            } else {
                Ratio::Unbounded
            };
        }
        if flip <= tmax {
            return Ratio::Flip;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, &a) in alpha.iter().enumerate() {
            let rate = -dir * a;
            if rate.abs() <= piv_tol {
                continue;
            }
            let j = self.head[i];
            let room = if rate < 0.0 {
                self.x[j] - self.lb[j]
            } else {
                self.ub[j] - self.x[j]
            };
            if !room.is_finite() {
                continue;
            }
            let t = room.max(0.0) / rate.abs();
            if t <= tmax {
                match best {
                    Some((_, _, br)) if rate.abs() <= br => {}
                    _ => best = Some((i, t, rate.abs())),
                }
            }
        }
        match best {
            Some((row, step, _)) => Ratio::Pivot { row, step },
            None => Ratio::Unbounded,
        }
    }

    fn iterate(&mut self, phase: Phase) -> Result<Status, SolveError> {
        loop {
            if self.diag.iterations >= self.opts.max_iterations {
                return Err(SolveError::IterationLimit {
                    iterations: self.diag.iterations,
                    rule: if self.bland {
                        PivotRule::Bland
                    } else {
                        PivotRule::Dantzig
                    },
                    consecutive_degenerate: self.stall,
                });
            }
            if self.pivots_since_refactor >= self.opts.refactor_interval {
                self.refactor();
            }
            let y = self.duals();
            let Some((q, dir, _)) = self.price(&y) else {
                return Ok(Status::Optimal);
            };
            self.diag.iterations += 1;
            if phase == Phase::One {
                self.diag.phase1_iterations += 1;
            }
            let alpha = self.column_ftran(q);
            let step = match self.ratio_test(q, dir, &alpha) {
                Ratio::Unbounded if self.pivots_since_refactor > 0 => {
                    // stale eta file can fake a descent ray; confirm on a fresh factor
                    self.refactor();
                    self.recompute_basics();
                    continue;
                }
                Ratio::Unbounded => return Ok(Status::Unbounded),
                Ratio::Flip => {
                    let t = self.ub[q] - self.lb[q];
                    self.move_along(q, dir, t, &alpha);
                    self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                    t
                }
                Ratio::Pivot { row, step } => {
                    self.move_along(q, dir, step, &alpha);
                    let leaving = self.head[row];
                    let rate = -dir * alpha[row];
                    self.x[leaving] = if rate < 0.0 {
                        self.lb[leaving]
                    } else {
                        self.ub[leaving]
                    };
                    if leaving >= self.n + self.m {
                        // artificials never come back
                        self.ub[leaving] = 0.0;
                        self.x[leaving] = 0.0;
                    }
                    self.pos[leaving] = usize::MAX;
                    self.pos[q] = row;
                    self.head[row] = q;
                    self.push_eta(&alpha, row);
                    self.pivots_since_refactor += 1;
                    step
                }
            };
            if step <= 1e-12 {
                self.stall += 1;
                if self.stall >= self.opts.stall_threshold && !self.bland {
                    self.bland = true;
                    self.diag.bland_engaged = true;
                }
            } else {
                self.stall = 0;
                self.bland = false;
            }
        }
    }

    fn move_along(&mut self, q: usize, dir: f64, t: f64, alpha: &[f64]) {
        if t == 0.0 {
            return;
        }
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.head[i];
                self.x[j] -= dir * t * a;
            }
        }
        self.x[q] += dir * t;
    }

    fn artificial_sum(&self) -> f64 {
        (self.n + self.m..self.ntot()).map(|j| self.x[j].abs()).sum()
    }

    fn run(mut self) -> Result<PrimalDualSolution, SolveError> {
        if !self.art_row.is_empty() {
            let status = self.iterate(Phase::One)?;
            self.refactor();
            if status != Status::Optimal || self.artificial_sum() > self.opts.phase1_tol {
                return Ok(self.terminal(Status::Infeasible));
            }
        }
        let nm = self.n + self.m;
        for j in nm..self.ntot() {
            self.ub[j] = 0.0;
            self.lb[j] = 0.0;
            self.x[j] = 0.0;
            self.cost[j] = 0.0;
        }
        for j in 0..self.n {
            self.cost[j] = self.lp.objective[j];
        }
        self.bland = false;
        self.stall = 0;
        self.recompute_basics();
        let status = self.iterate(Phase::Two)?;
        if status == Status::Unbounded {
            return Ok(self.terminal(Status::Unbounded));
        }
        self.refactor();
        // refactoring may expose tiny dual infeasibilities; polish once more
        let status = self.iterate(Phase::Two)?;
        if status == Status::Unbounded {
            return Ok(self.terminal(Status::Unbounded));
        }
        Ok(self.finish())
    }

    fn terminal(self, status: Status) -> PrimalDualSolution {
        PrimalDualSolution {
            status,
            objective: match status {
                Status::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            basis: Vec::new(),
            row_basis: Vec::new(),
            certificate: KktCertificate::default(),
            diagnostics: self.diag,
        }
    }

    fn status_of(&self, j: usize) -> BasisStatus {
        if self.pos[j] != usize::MAX {
            BasisStatus::Basic
        } else if self.is_fixed(j) {
            BasisStatus::Fixed
        } else if self.x[j] == self.lb[j] {
            BasisStatus::AtLower
        } else if self.x[j] == self.ub[j] {
            BasisStatus::AtUpper
        } else {
            BasisStatus::Free
        }
    }

    fn finish(mut self) -> PrimalDualSolution {
        let n = self.n;
        let m = self.m;
        let y = self.duals();
        let primal: Vec<f64> = self.x[..n].to_vec();
        let mut reduced = Vec::with_capacity(n);
        for j in 0..n {
            reduced.push(self.reduced_cost(j, &y));
        }
        let objective = self.lp.objective_value(&primal);

        let mut cert = KktCertificate {
            primal_residual: self.lp.max_violation(&primal),
            ..KktCertificate::default()
        };
        let mut dual_obj = 0.0;
        let activity: Vec<f64> = self.lp.rows.iter().map(|r| r.activity(&primal)).collect();
        let mut assess = |d: f64, v: f64, lo: f64, hi: f64, cert: &mut KktCertificate| {
            if lo == hi {
                dual_obj += d * lo;
                return;
            }
            if d > 0.0 {
                if lo.is_finite() {
                    dual_obj += d * lo;
                    cert.complementarity = cert.complementarity.max(d * (v - lo).abs());
                } else {
                    cert.dual_infeasibility = cert.dual_infeasibility.max(d);
                }
            } else if d < 0.0 {
                if hi.is_finite() {
                    dual_obj += d * hi;
                    cert.complementarity = cert.complementarity.max(-d * (hi - v).abs());
                } else {
                    cert.dual_infeasibility = cert.dual_infeasibility.max(-d);
                }
            }
        };
        for j in 0..n {
            assess(reduced[j], primal[j], self.lb[j], self.ub[j], &mut cert);
        }
        for i in 0..m {
            let j = n + i;
            assess(y[i], activity[i], self.lb[j], self.ub[j], &mut cert);
        }
        cert.dual_objective = dual_obj;
        cert.gap = (objective - dual_obj).abs();

        let tol = self.opts.feasibility_tol;
        for &j in &self.head {
            if j < n + m && dist_to_bounds(self.x[j], self.lb[j], self.ub[j]) <= tol {
                self.diag.degenerate_basics += 1;
            }
        }
        for j in 0..n + m {
            if self.pos[j] == usize::MAX && !self.is_fixed(j) {
                let d = if j < n { reduced[j] } else { y[j - n] };
                if d.abs() <= self.opts.optimality_tol {
                    self.diag.zero_reduced_cost_nonbasics += 1;
                }
            }
        }
        let basis = (0..n).map(|j| self.status_of(j)).collect();
        let row_basis = (0..m).map(|i| self.status_of(n + i)).collect();
        PrimalDualSolution {
            status: Status::Optimal,
            objective,
            primal,
            dual: y,
            reduced_costs: reduced,
            basis,
            row_basis,
            certificate: cert,
            diagnostics: self.diag,
        }
    }
}

pub(super) fn solve(
    lp: &LinearProgram,
    opts: &SolverOptions,
) -> Result<PrimalDualSolution, SolveError> {
    for j in 0..lp.num_cols() {
        if lp.lower[j] > lp.upper[j] {
            return Ok(PrimalDualSolution::infeasible());
        }
    }
    Simplex::new(lp, opts).run()
}
