//! Bounded-variable revised primal simplex.
//!
//! Every row `lo <= a.x <= hi` gets a logical variable `s = -a.x` with bounds
//! `[-hi, -lo]`, so the constraint matrix is `[A | I]` and the all-logical
//! basis is the identity. The basis inverse is kept in product form (a file
//! of eta columns) and rebuilt from scratch every `refactor_interval` pivots.
//! Phase one minimizes the sum of bound violations of basic variables; phase
//! two the true cost. Pricing is Dantzig's rule with a Harris ratio test,
//! switching to Bland's rule after a run of degenerate pivots.

use thiserror::Error;

const FEAS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
}

#[derive(Debug, Clone, Default)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<SparseRow>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl LpProblem {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    /// Largest violation of any row or column bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.col_lower[j] - v).max(v - self.col_upper[j]);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let act: f64 = row.idx.iter().zip(&row.val).map(|(&j, &a)| a * x[j]).sum();
            worst = worst.max(self.row_lower[r] - act).max(act - self.row_upper[r]);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural values (meaningful when optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Final basis, reusable as a starting point for a nearby problem.
    pub basis: Basis,
}

/// Basic variable per row plus the bound each nonbasic variable sits at.
/// Variables `0..n` are structural, `n..n + m` the row logicals.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub head: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// `None` scales with problem size.
    pub max_iterations: Option<usize>,
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: None,
            refactor_interval: 80,
            bland_after: 60,
        }
    }
}

struct Eta {
    pivot: usize,
    pivot_val: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

struct Solver<'a> {
    p: &'a LpProblem,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    pos: Vec<Pos>,
    head: Vec<usize>,
    etas: Vec<Eta>,
    opts: SimplexOptions,
}

pub fn solve(p: &LpProblem, opts: SimplexOptions) -> Result<LpOutcome, LpError> {
    Solver::new(p, opts).run(0)
}

/// Like [`solve`], starting from `start` when it fits the problem's shape.
/// A start basis that is dual feasible (the optimal basis of a problem with
/// the same costs and different bounds) is reoptimized by the dual simplex;
/// anything else falls back to the primal method.
pub fn solve_from(p: &LpProblem, opts: SimplexOptions, start: Option<&Basis>) -> Result<LpOutcome, LpError> {
    let mut solver = Solver::new(p, opts);
    let mut iterations = 0;
    if let Some(b) = start {
        if solver.install(b)? {
            let (end, used) = solver.dual()?;
            iterations = used;
            if end == DualEnd::Infeasible {
                return Ok(solver.outcome(LpStatus::Infeasible, iterations));
            }
        }
    }
    solver.run(iterations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DualEnd {
    PrimalFeasible,
    Infeasible,
    /// The start basis was not dual feasible; continue with the primal method.
    GaveUp,
}

impl<'a> Solver<'a> {
    fn new(p: &'a LpProblem, opts: SimplexOptions) -> Self {
        let n = p.num_cols();
        let m = p.rows.len();
        let mut counts = vec![0usize; n + 1];
        for row in &p.rows {
            for &j in &row.idx {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut fill = col_start.clone();
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (r, row) in p.rows.iter().enumerate() {
            for (&j, &a) in row.idx.iter().zip(&row.val) {
                col_row[fill[j]] = r;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut lower = p.col_lower.clone();
        let mut upper = p.col_upper.clone();
        lower.extend(p.row_upper.iter().map(|&u| -u));
        upper.extend(p.row_lower.iter().map(|&l| -l));

        let mut x = vec![0.0; n + m];
        let mut pos = vec![Pos::Zero; n + m];
        for j in 0..n {
            (x[j], pos[j]) = if lower[j].is_finite() {
                (lower[j], Pos::Lower)
            } else if upper[j].is_finite() {
                (upper[j], Pos::Upper)
            } else {
                (0.0, Pos::Zero)
            };
        }
        let head: Vec<usize> = (n..n + m).collect();
        for (r, &v) in head.iter().enumerate() {
            pos[v] = Pos::Basic(r);
        }
        let mut s = Solver {
            p,
            n,
            m,
            col_start,
            col_row,
            col_val,
            lower,
            upper,
            x,
            pos,
            head,
            etas: Vec::new(),
            opts,
        };
        s.recompute_basics();
        s
    }

    /// Loads a start basis; `false` when it does not fit and was ignored.
    fn install(&mut self, b: &Basis) -> Result<bool, LpError> {
        let total = self.n + self.m;
        if b.head.len() != self.m || b.at_upper.len() != total {
            return Ok(false);
        }
        let mut seen = vec![false; total];
        for &v in &b.head {
            if v >= total || seen[v] {
                return Ok(false);
            }
            seen[v] = true;
        }
        for j in 0..total {
            self.pos[j] = if b.at_upper[j] && self.upper[j].is_finite() {
                Pos::Upper
            } else {
                self.nonbasic_pos(j)
            };
            self.x[j] = match self.pos[j] {
                Pos::Upper => self.upper[j],
                Pos::Lower => self.lower[j],
                _ => 0.0,
            };
        }
        self.head = b.head.clone();
        for (r, &v) in self.head.iter().enumerate() {
            self.pos[v] = Pos::Basic(r);
        }
        self.refactor()?;
        Ok(true)
    }

    /// Phase-two duals `y = c_B B^-1` and reduced costs of nonbasic columns.
    fn reduced_costs(&self, y: &mut [f64], d: &mut [f64]) {
        for (r, &v) in self.head.iter().enumerate() {
            y[r] = if v < self.n { self.p.cost[v] } else { 0.0 };
        }
        self.btran(y);
        for j in 0..self.n + self.m {
            if matches!(self.pos[j], Pos::Basic(_)) {
                d[j] = 0.0;
                continue;
            }
            let mut dj = if j < self.n { self.p.cost[j] } else { 0.0 };
            for (r, a) in self.column(j) {
                dj -= y[r] * a;
            }
            d[j] = dj;
        }
    }

    /// Dual simplex from a dual feasible basis until the basics are within
    /// their bounds. Boxed nonbasics with a wrong-signed reduced cost are
    /// moved to the other bound.
    fn dual(&mut self) -> Result<(DualEnd, usize), LpError> {
        let limit = self.opts.max_iterations.unwrap_or(20_000 + 40 * (self.n + self.m));
        let total = self.n + self.m;
        let mut y = vec![0.0; self.m];
        let mut d = vec![0.0; total];
        let mut rho = vec![0.0; self.m];
        let mut alpha_row = vec![0.0; total];
        let mut alpha = vec![0.0; self.m];
        let mut iterations = 0;
        let mut since_refactor = 0;
        loop {
            if iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            if since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
                since_refactor = 0;
            }
            self.reduced_costs(&mut y, &mut d);
            let mut flipped = false;
            for j in 0..total {
                let wrong = match self.pos[j] {
                    Pos::Lower => d[j] < -DUAL_TOL,
                    Pos::Upper => d[j] > DUAL_TOL,
                    Pos::Zero => d[j].abs() > DUAL_TOL,
                    Pos::Basic(_) => false,
                };
                if !wrong || self.lower[j] == self.upper[j] {
                    continue;
                }
                if !(self.lower[j].is_finite() && self.upper[j].is_finite()) {
                    return Ok((DualEnd::GaveUp, iterations));
                }
                let to_upper = d[j] < 0.0;
                self.pos[j] = if to_upper { Pos::Upper } else { Pos::Lower };
                self.x[j] = if to_upper { self.upper[j] } else { self.lower[j] };
                flipped = true;
            }
            if flipped {
                self.recompute_basics();
            }

            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64, f64)> = None; // (row, violation, bound)
            for (r, &v) in self.head.iter().enumerate() {
                let (val, lo, up) = (self.x[v], self.lower[v], self.upper[v]);
                let (viol, bound) = if val < lo - FEAS_TOL {
                    (lo - val, lo)
                } else if val > up + FEAS_TOL {
                    (val - up, up)
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, best, _)| viol > best) {
                    leave = Some((r, viol, bound));
                }
            }
            let Some((r, _, bound)) = leave else {
                return Ok((DualEnd::PrimalFeasible, iterations));
            };
            let p = self.head[r];
            let to_lower = self.x[p] < self.lower[p];

            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.btran(&mut rho);
            for j in 0..total {
                alpha_row[j] = if matches!(self.pos[j], Pos::Basic(_)) || self.lower[j] == self.upper[j] {
                    0.0
                } else {
                    self.column(j).map(|(i, a)| rho[i] * a).sum()
                };
            }
            // x_p rises when to_lower (it sits below its lower bound)
            let eligible = |a: f64, pos: Pos| -> bool {
                if a.abs() <= PIVOT_TOL {
                    return false;
                }
                match pos {
                    Pos::Lower => (a < 0.0) == to_lower,
                    Pos::Upper => (a > 0.0) == to_lower,
                    Pos::Zero => true,
                    Pos::Basic(_) => false,
                }
            };
            let mut theta_max = f64::INFINITY;
            for j in 0..total {
                if eligible(alpha_row[j], self.pos[j]) {
                    theta_max = theta_max.min((d[j].abs() + DUAL_TOL) / alpha_row[j].abs());
                }
            }
            let mut enter: Option<usize> = None;
            for j in 0..total {
                if eligible(alpha_row[j], self.pos[j])
                    && d[j].abs() / alpha_row[j].abs() <= theta_max
                    && enter.is_none_or(|q| alpha_row[j].abs() > alpha_row[q].abs())
                {
                    enter = Some(j);
                }
            }
            let Some(q) = enter else {
                return Ok((DualEnd::Infeasible, iterations));
            };

            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (i, a) in self.column(q) {
                alpha[i] = a;
            }
            self.ftran(&mut alpha);
            if alpha[r].abs() <= PIVOT_TOL {
                // row and column disagree: rebuild the factors and retry
                self.refactor()?;
                since_refactor = 0;
                iterations += 1;
                continue;
            }
            // basics move by -alpha * step as x_q moves by step
            let step = (self.x[p] - bound) / alpha[r];
            for i in 0..self.m {
                if alpha[i] != 0.0 {
                    let v = self.head[i];
                    self.x[v] -= step * alpha[i];
                }
            }
            self.x[q] += step;
            self.x[p] = bound;
            self.pos[p] = if bound == self.lower[p] { Pos::Lower } else { Pos::Upper };
            self.head[r] = q;
            self.pos[q] = Pos::Basic(r);
            self.push_eta(r, &alpha);
            since_refactor += 1;
            iterations += 1;
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = if j < self.n {
            (self.col_start[j], self.col_start[j + 1])
        } else {
            (0, 0)
        };
        let logical = (j >= self.n).then(|| (j - self.n, 1.0));
        self.col_row[a..b]
            .iter()
            .copied()
            .zip(self.col_val[a..b].iter().copied())
            .chain(logical)
    }

    fn ftran(&self, w: &mut [f64]) {
        for e in &self.etas {
            let wp = w[e.pivot];
            if wp == 0.0 {
                continue;
            }
            let wp = wp / e.pivot_val;
            w[e.pivot] = wp;
            for (&i, &v) in e.idx.iter().zip(&e.val) {
                w[i] -= v * wp;
            }
        }
    }

    fn btran(&self, z: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut sum = z[e.pivot];
            for (&i, &v) in e.idx.iter().zip(&e.val) {
                sum -= v * z[i];
            }
            z[e.pivot] = sum / e.pivot_val;
        }
    }

    fn push_eta(&mut self, pivot: usize, col: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &v) in col.iter().enumerate() {
            if i != pivot && v.abs() > 1e-14 {
                idx.push(i);
                val.push(v);
            }
        }
        self.etas.push(Eta {
            pivot,
            pivot_val: col[pivot],
            idx,
            val,
        });
    }

    /// `x_B = B^-1 (-N x_N)`.
    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if matches!(self.pos[j], Pos::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (r, a) in self.column(j) {
                rhs[r] -= a * xj;
            }
        }
        self.ftran(&mut rhs);
        for (r, &v) in self.head.iter().enumerate() {
            self.x[v] = rhs[r];
        }
    }

    /// Rebuilds the eta file for the current basis.
    fn refactor(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        let m = self.m;
        let n = self.n;
        let mut structural: Vec<usize> = self.head.iter().copied().filter(|&v| v < n).collect();
        structural.sort_by_key(|&j| (self.col_start[j + 1] - self.col_start[j], j));
        // rows whose logical stays basic keep their identity column
        let mut row_taken = vec![false; m];
        for &v in &self.head {
            if v >= n {
                row_taken[v - n] = true;
            }
        }
        let mut new_head: Vec<Option<usize>> = vec![None; m];
        for &v in &self.head {
            if v >= n {
                new_head[v - n] = Some(v);
            }
        }
        let mut w = vec![0.0; m];
        for j in structural {
            w.iter_mut().for_each(|v| *v = 0.0);
            for (r, a) in self.column(j) {
                w[r] = a;
            }
            self.ftran(&mut w);
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                if !row_taken[r] && w[r].abs() > best.map_or(PIVOT_TOL, |b| b.1) {
                    best = Some((r, w[r].abs()));
                }
            }
            match best {
                Some((r, _)) => {
                    row_taken[r] = true;
                    new_head[r] = Some(j);
                    self.push_eta(r, &w);
                }
                None => {
                    // dependent column: leave it at a bound, a logical fills its slot below
                    self.pos[j] = self.nonbasic_pos(j);
                    self.x[j] = self.nonbasic_value(j);
                }
            }
        }
        for r in 0..m {
            let v = match new_head[r] {
                Some(v) => v,
                None => n + r,
            };
            new_head[r] = Some(v);
            self.pos[v] = Pos::Basic(r);
        }
        self.head = new_head.into_iter().map(|v| v.expect("filled")).collect();
        self.recompute_basics();
        Ok(())
    }

    fn nonbasic_pos(&self, j: usize) -> Pos {
        if self.lower[j].is_finite() {
            Pos::Lower
        } else if self.upper[j].is_finite() {
            Pos::Upper
        } else {
            Pos::Zero
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.nonbasic_pos(j) {
            Pos::Lower => self.lower[j],
            Pos::Upper => self.upper[j],
            _ => 0.0,
        }
    }

    fn infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&v| (self.lower[v] - self.x[v]).max(self.x[v] - self.upper[v]).max(0.0))
            .sum()
    }

    fn run(mut self, mut iterations: usize) -> Result<LpOutcome, LpError> {
        let limit = self.opts.max_iterations.unwrap_or(20_000 + 40 * (self.n + self.m));
        let mut since_refactor = 0;
        let mut degenerate_run = 0;
        let mut verified_once = false;
        let mut y = vec![0.0; self.m];
        let mut alpha = vec![0.0; self.m];

        loop {
            if iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            if since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
                since_refactor = 0;
            }

            let phase_one = self
                .head
                .iter()
                .any(|&v| self.x[v] < self.lower[v] - FEAS_TOL || self.x[v] > self.upper[v] + FEAS_TOL);

            for (r, &v) in self.head.iter().enumerate() {
                y[r] = if phase_one {
                    if self.x[v] < self.lower[v] - FEAS_TOL {
                        -1.0
                    } else if self.x[v] > self.upper[v] + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else if v < self.n {
                    self.p.cost[v]
                } else {
                    0.0
                };
            }
            self.btran(&mut y);

            let bland = degenerate_run >= self.opts.bland_after;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                let st = self.pos[j];
                if matches!(st, Pos::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut d = if phase_one || j >= self.n { 0.0 } else { self.p.cost[j] };
                for (r, a) in self.column(j) {
                    d -= y[r] * a;
                }
                let eligible = match st {
                    Pos::Lower => d < -DUAL_TOL,
                    Pos::Upper => d > DUAL_TOL,
                    Pos::Zero => d.abs() > DUAL_TOL,
                    Pos::Basic(_) => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }

            let Some((q, dq)) = entering else {
                if phase_one && self.infeasibility() > CHECK_TOL {
                    return Ok(self.outcome(LpStatus::Infeasible, iterations));
                }
                // marginal violations only: let the final check decide
                let out = self.outcome(LpStatus::Optimal, iterations);
                if self.p.max_violation(&out.x) <= CHECK_TOL {
                    return Ok(out);
                }
                if verified_once {
                    return Err(LpError::NumericalInstability(format!(
                        "solution violates constraints by {:e}",
                        self.p.max_violation(&out.x)
                    )));
                }
                verified_once = true;
                self.refactor()?;
                since_refactor = 0;
                continue;
            };

            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (r, a) in self.column(q) {
                alpha[r] = a;
            }
            self.ftran(&mut alpha);

            // Harris pass one: largest step with bounds relaxed by the tolerance
            let mut theta_max = f64::INFINITY;
            let target = |s: &Self, v: usize, rate: f64| -> Option<(f64, f64)> {
                // (bound the basic variable runs into, current value)
                let (val, lo, up) = (s.x[v], s.lower[v], s.upper[v]);
                if phase_one && val < lo - FEAS_TOL {
                    (rate > 0.0).then_some((lo, val))
                } else if phase_one && val > up + FEAS_TOL {
                    (rate < 0.0).then_some((up, val))
                } else if rate < 0.0 {
                    lo.is_finite().then_some((lo, val))
                } else {
                    up.is_finite().then_some((up, val))
                }
            };
            for r in 0..self.m {
                let rate = -dir * alpha[r];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let v = self.head[r];
                if let Some((bound, val)) = target(&self, v, rate) {
                    let relaxed = if rate < 0.0 {
                        (val - bound + FEAS_TOL) / -rate
                    } else {
                        (bound + FEAS_TOL - val) / rate
                    };
                    theta_max = theta_max.min(relaxed.max(0.0));
                }
            }
            let flip = self.upper[q] - self.lower[q];
            let flips = flip.is_finite() && flip <= theta_max;

            // pass two: among steps within theta_max, the largest pivot
            let mut leave: Option<(usize, f64, f64)> = None; // (row, theta, bound)
            if theta_max.is_finite() && !flips {
                for r in 0..self.m {
                    let rate = -dir * alpha[r];
                    if rate.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let v = self.head[r];
                    if let Some((bound, val)) = target(&self, v, rate) {
                        let exact = ((bound - val) / rate).max(0.0);
                        if exact <= theta_max {
                            let better = match leave {
                                None => true,
                                Some((lr, lt, _)) => {
                                    if bland {
                                        exact < lt - 1e-12 || (exact <= lt + 1e-12 && v < self.head[lr])
                                    } else {
                                        alpha[r].abs() > alpha[lr].abs()
                                    }
                                }
                            };
                            if better {
                                leave = Some((r, exact, bound));
                            }
                        }
                    }
                }
            }

            iterations += 1;
            let theta = match leave {
                _ if flips => flip,
                Some((_, t, _)) => t,
                None => {
                    if phase_one {
                        return Err(LpError::NumericalInstability("unbounded ray in phase one".into()));
                    }
                    return Ok(self.outcome(LpStatus::Unbounded, iterations));
                }
            };

            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            for r in 0..self.m {
                if alpha[r] != 0.0 {
                    let v = self.head[r];
                    self.x[v] -= dir * theta * alpha[r];
                }
            }
            self.x[q] += dir * theta;

            if flips {
                let to_upper = dir > 0.0;
                self.x[q] = if to_upper { self.upper[q] } else { self.lower[q] };
                self.pos[q] = if to_upper { Pos::Upper } else { Pos::Lower };
                continue;
            }

            let (r, _, bound) = leave.expect("checked above");
            let out = self.head[r];
            self.x[out] = bound;
            self.pos[out] = if bound == self.lower[out] {
                Pos::Lower
            } else {
                Pos::Upper
            };
            self.head[r] = q;
            self.pos[q] = Pos::Basic(r);
            self.push_eta(r, &alpha);
            since_refactor += 1;
        }
    }

    fn outcome(&self, status: LpStatus, iterations: usize) -> LpOutcome {
        let x: Vec<f64> = (0..self.n)
            .map(|j| {
                let v = self.x[j];
                // snap values within tolerance of a bound
                if (v - self.lower[j]).abs() <= FEAS_TOL {
                    self.lower[j]
                } else if (v - self.upper[j]).abs() <= FEAS_TOL {
                    self.upper[j]
                } else {
                    v
                }
            })
            .collect();
        let objective = x.iter().zip(&self.p.cost).map(|(a, c)| a * c).sum();
        LpOutcome {
            status,
            x,
            objective,
            iterations,
            basis: Basis {
                head: self.head.clone(),
                at_upper: self.pos.iter().map(|p| *p == Pos::Upper).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Row = (Vec<(usize, f64)>, f64, f64);

    fn lp(cost: Vec<f64>, bounds: Vec<(f64, f64)>, rows: Vec<Row>) -> LpProblem {
        LpProblem {
            col_lower: bounds.iter().map(|b| b.0).collect(),
            col_upper: bounds.iter().map(|b| b.1).collect(),
            cost,
            row_lower: rows.iter().map(|r| r.1).collect(),
            row_upper: rows.iter().map(|r| r.2).collect(),
            rows: rows
                .into_iter()
                .map(|(e, _, _)| SparseRow {
                    idx: e.iter().map(|t| t.0).collect(),
                    val: e.iter().map(|t| t.1).collect(),
                })
                .collect(),
        }
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn textbook_max() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = lp(
            vec![-3.0, -5.0],
            vec![(0.0, INF), (0.0, INF)],
            vec![
                (vec![(0, 1.0)], -INF, 4.0),
                (vec![(1, 2.0)], -INF, 12.0),
                (vec![(0, 3.0), (1, 2.0)], -INF, 18.0),
            ],
        );
        let out = solve(&p, SimplexOptions::default()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 36.0).abs() < 1e-9);
        assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y s.t. x + y >= 2, x - y = 0.5, bounded vars
        let p = lp(
            vec![1.0, 1.0],
            vec![(0.0, 10.0), (0.0, 10.0)],
            vec![
                (vec![(0, 1.0), (1, 1.0)], 2.0, INF),
                (vec![(0, 1.0), (1, -1.0)], 0.5, 0.5),
            ],
        );
        let out = solve(&p, SimplexOptions::default()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 2.0).abs() < 1e-9);
        assert!((out.x[0] - 1.25).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let p = lp(vec![1.0], vec![(0.0, 1.0)], vec![(vec![(0, 1.0)], 2.0, INF)]);
        assert_eq!(
            solve(&p, SimplexOptions::default()).unwrap().status,
            LpStatus::Infeasible
        );
    }

    #[test]
    fn detects_unbounded() {
        let p = lp(vec![-1.0], vec![(0.0, INF)], vec![(vec![(0, 1.0)], 1.0, INF)]);
        assert_eq!(
            solve(&p, SimplexOptions::default()).unwrap().status,
            LpStatus::Unbounded
        );
    }

    #[test]
    fn bound_flip_only() {
        // min -x - y with x, y in [0, 1] and a slack row
        let p = lp(
            vec![-1.0, -1.0],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], -INF, 5.0)],
        );
        let out = solve(&p, SimplexOptions::default()).unwrap();
        assert!((out.objective + 2.0).abs() < 1e-12);
    }

    #[test]
    fn refactor_keeps_solution() {
        // assignment LP: 6x6, integral optimum
        let n = 6;
        let cost: Vec<f64> = (0..n * n).map(|k| ((k * 37) % 11) as f64 + 1.0).collect();
        let mut rows = Vec::new();
        for i in 0..n {
            rows.push(((0..n).map(|j| (i * n + j, 1.0)).collect(), 1.0, 1.0));
            rows.push(((0..n).map(|j| (j * n + i, 1.0)).collect(), 1.0, 1.0));
        }
        let p = lp(cost, vec![(0.0, 1.0); n * n], rows);
        let a = solve(&p, SimplexOptions::default()).unwrap();
        let b = solve(
            &p,
            SimplexOptions {
                refactor_interval: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.status, LpStatus::Optimal);
        assert!((a.objective - b.objective).abs() < 1e-9);
        assert!(p.max_violation(&a.x) < 1e-9);
    }

    #[test]
    fn iteration_limit_reported() {
        let p = lp(
            vec![-3.0, -5.0],
            vec![(0.0, INF), (0.0, INF)],
            vec![(vec![(0, 3.0), (1, 2.0)], -INF, 18.0), (vec![(1, 1.0)], -INF, 6.0)],
        );
        let r = solve(
            &p,
            SimplexOptions {
                max_iterations: Some(1),
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(LpError::IterationLimit(1))));
    }
}
