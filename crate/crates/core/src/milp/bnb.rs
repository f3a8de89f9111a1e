//! Best-first branch-and-bound over the LP relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::Range;
use std::time::{Duration, Instant};

use crate::error::{OffloadError, Result};
use crate::milp::model::{extract_schedule, MilpModel};
use crate::milp::simplex::{solve_from, Basis, LpError, LpProblem, LpStatus, SimplexOptions, SparseRow};
use crate::model::Schedule;
use crate::timeline::Occupancy;

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub gap_tol: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Run a diving heuristic every this many nodes (0 disables it).
    pub dive_interval: usize,
    pub simplex: SimplexOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            gap_tol: 1e-6,
            node_limit: 1_000_000,
            time_limit: None,
            dive_interval: 50,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    /// Gap closed to within the tolerance.
    Optimal,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub schedule: Schedule,
    pub solution: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    /// LP relaxations solved inside the tree.
    pub nodes: usize,
    /// LP relaxations solved by the diving heuristic.
    pub dive_lps: usize,
    pub wall_time: Duration,
    /// Incumbent objective after each processed node (non-increasing).
    pub incumbent_trace: Vec<f64>,
    /// Global lower bound after each processed node (non-decreasing).
    pub bound_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Fix {
    Col(usize, f64),
    /// Task on this server: the assignment row becomes an equality and the
    /// task's columns on other servers are closed.
    OnServer(usize, usize),
    OffServer(usize, usize),
}

struct Node {
    bound: f64,
    seq: usize,
    fixes: Vec<Fix>,
    solution: Vec<f64>,
    basis: Basis,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

enum Relaxed {
    Infeasible,
    Solved { objective: f64, x: Vec<f64>, basis: Basis },
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if incumbent.is_infinite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

fn fractionality(v: f64) -> f64 {
    (v - v.floor()).min(v.ceil() - v)
}

/// The model projected onto its start indicators `y_ijk`.
///
/// `x_ij = sum_k y_ijk` and `m_itj` are linear images of `y`; at an LP optimum
/// `to` and `tc` sit on their lower linearization rows and `tm` and `ts` can
/// always be completed, so this LP has the same optimum as the full
/// relaxation and the same integer points. Branching on `x` and `y` alone
/// therefore searches the full model. Every incumbent is lifted back and
/// checked against all rows of the full model.
struct Projection {
    lp: LpProblem,
    /// `(task, server, slot)` of each column.
    cols: Vec<(usize, usize, usize)>,
    /// Column range of each `(task, server)` pair.
    spans: Vec<Vec<Range<usize>>>,
    constant: f64,
}

impl Projection {
    fn new(model: &MilpModel) -> Self {
        let s = &model.scenario;
        let n = s.num_tasks();
        let delta = s.urgency_penalty;
        let reward = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        let first = s.first_task();
        let mut cols = Vec::new();
        let mut spans = Vec::with_capacity(n);
        let mut cost = Vec::new();
        let mut upper = Vec::new();
        let mut rows: Vec<SparseRow> = Vec::new();
        let (mut row_lower, mut row_upper) = (Vec::new(), Vec::new());
        let mut covering: Vec<Vec<Vec<usize>>> = s.servers.iter().map(|_| vec![Vec::new(); s.slot_count()]).collect();
        for i in 0..n {
            let task = &s.tasks[i];
            let mut assign = SparseRow {
                idx: Vec::new(),
                val: Vec::new(),
            };
            let mut task_spans = Vec::with_capacity(s.num_servers());
            for j in 0..s.num_servers() {
                let from = cols.len();
                for sv in &model.starts[i][j] {
                    let p = s.placement(i, j, sv.slot).expect("start variables mirror placements");
                    let c = cols.len();
                    cols.push((i, j, sv.slot));
                    let wait = (p.start - task.arrival) / task.slack();
                    cost.push(delta * (s.comm_latency(i) + s.duration(i, j) + wait) - reward);
                    // the pinned first task may only start on arrival
                    upper.push(if Some(i) == first && p.start != task.arrival {
                        0.0
                    } else {
                        1.0
                    });
                    assign.idx.push(c);
                    assign.val.push(1.0);
                    for t in p.slots() {
                        covering[j][t].push(c);
                    }
                }
                task_spans.push(from..cols.len());
            }
            spans.push(task_spans);
            rows.push(assign);
            row_lower.push(if task.urgent { 1.0 } else { f64::NEG_INFINITY });
            row_upper.push(1.0);
        }
        for (j, per_slot) in covering.into_iter().enumerate() {
            let cap = s.servers[j].cpu_count as f64;
            for users in per_slot {
                if users.len() as f64 > cap {
                    let val = vec![1.0; users.len()];
                    rows.push(SparseRow { idx: users, val });
                    row_lower.push(f64::NEG_INFINITY);
                    row_upper.push(cap);
                }
            }
        }
        Projection {
            lp: LpProblem {
                col_lower: vec![0.0; cols.len()],
                col_upper: upper,
                cost,
                rows,
                row_lower,
                row_upper,
            },
            cols,
            spans,
            constant: model.objective_constant,
        }
    }

    /// Applies `fixes` to a copy of the LP; `None` if they contradict.
    fn restricted(&self, fixes: &[Fix]) -> Option<LpProblem> {
        let mut lp = self.lp.clone();
        let close = |lp: &mut LpProblem, c: usize| {
            if lp.col_lower[c] > 0.0 {
                return false;
            }
            lp.col_upper[c] = 0.0;
            true
        };
        for &fix in fixes {
            match fix {
                Fix::Col(c, v) => {
                    if v < lp.col_lower[c] || v > lp.col_upper[c] {
                        return None;
                    }
                    lp.col_lower[c] = v;
                    lp.col_upper[c] = v;
                }
                Fix::OnServer(i, j) => {
                    lp.row_lower[i] = 1.0;
                    for (other, span) in self.spans[i].iter().enumerate() {
                        if other != j && !span.clone().all(|c| close(&mut lp, c)) {
                            return None;
                        }
                    }
                }
                Fix::OffServer(i, j) => {
                    if !self.spans[i][j].clone().all(|c| close(&mut lp, c)) {
                        return None;
                    }
                }
            }
        }
        Some(lp)
    }

    fn relax(&self, fixes: &[Fix], opts: SimplexOptions, start: Option<&Basis>) -> Result<Relaxed> {
        let Some(lp) = self.restricted(fixes) else {
            return Ok(Relaxed::Infeasible);
        };
        let out = solve_from(&lp, opts, start)?;
        match out.status {
            LpStatus::Optimal => Ok(Relaxed::Solved {
                objective: out.objective + self.constant,
                x: out.x,
                basis: out.basis,
            }),
            LpStatus::Infeasible => Ok(Relaxed::Infeasible),
            // every column is bounded, so this signals numerical trouble
            LpStatus::Unbounded => Err(OffloadError::Lp(LpError::NumericalInstability(
                "relaxation reported unbounded".into(),
            ))),
        }
    }

    fn assignment_level(&self, y: &[f64], i: usize, j: usize) -> f64 {
        y[self.spans[i][j].clone()].iter().sum()
    }

    /// Branching decision for `y`: the most fractional assignment `x_ij`
    /// first, then the most fractional start column; lowest index on ties.
    /// `None` once `y` is integral.
    fn branching(&self, y: &[f64]) -> Option<[Fix; 2]> {
        let mut best: Option<((usize, usize), f64)> = None;
        for (i, task_spans) in self.spans.iter().enumerate() {
            for j in 0..task_spans.len() {
                let frac = fractionality(self.assignment_level(y, i, j));
                if frac > INT_TOL && best.is_none_or(|(_, f)| frac > f + 1e-12) {
                    best = Some(((i, j), frac));
                }
            }
        }
        if let Some(((i, j), _)) = best {
            return Some([Fix::OffServer(i, j), Fix::OnServer(i, j)]);
        }
        let mut best: Option<(usize, f64)> = None;
        for (c, &v) in y.iter().enumerate() {
            let frac = fractionality(v);
            if frac > INT_TOL && best.is_none_or(|(_, f)| frac > f + 1e-12) {
                best = Some((c, frac));
            }
        }
        best.map(|(c, _)| [Fix::Col(c, 0.0), Fix::Col(c, 1.0)])
    }

    /// Full-model point of an integral `y`, with its exact objective.
    fn lift(&self, model: &MilpModel, y: &[f64]) -> Option<(Vec<f64>, f64)> {
        let s = &model.scenario;
        let mut decisions = vec![None; s.num_tasks()];
        for (c, &(i, j, k)) in self.cols.iter().enumerate() {
            if y[c] > 0.5 {
                decisions[i] = Some((j, s.placement(i, j, k)?.start));
            }
        }
        lift_schedule(model, &Schedule::from_decisions(s, &decisions))
    }

    /// Rounds a fractional `y` into a schedule: each task goes to its
    /// heaviest server when that carries at least half its mass (urgent
    /// tasks always), in order of mean LP start, at the earliest free slot.
    /// Dropped tasks are then inserted wherever that lowers the objective.
    fn round(&self, model: &MilpModel, y: &[f64]) -> Schedule {
        let s = &model.scenario;
        let n = s.num_tasks();
        let first = s.first_task();
        let mut wanted: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..n {
            let (j, level) = (0..s.num_servers())
                .map(|j| (j, self.assignment_level(y, i, j)))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            if level >= 0.5 || (s.tasks[i].urgent && level > INT_TOL) {
                let mean: f64 = self.spans[i][j]
                    .clone()
                    .map(|c| y[c] * self.cols[c].2 as f64)
                    .sum::<f64>()
                    / level;
                wanted.push((i, j, mean));
            }
        }
        wanted.sort_by(|a, b| {
            (Some(b.0) == first)
                .cmp(&(Some(a.0) == first))
                .then(s.tasks[b.0].urgent.cmp(&s.tasks[a.0].urgent))
                .then(a.2.total_cmp(&b.2))
                .then(a.0.cmp(&b.0))
        });
        let mut occ = Occupancy::new(s);
        let mut decisions = vec![None; n];
        let place = |occ: &mut Occupancy, i: usize, j: usize| -> Option<f64> {
            let p = occ.earliest_fit(s, i, j)?;
            if Some(i) == first && p.start != s.tasks[i].arrival {
                return None;
            }
            occ.reserve(j, &p);
            Some(p.start)
        };
        for &(i, j, _) in &wanted {
            decisions[i] = place(&mut occ, i, j).map(|t| (j, t));
        }
        let reward = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        let mut rest: Vec<usize> = (0..n).filter(|&i| decisions[i].is_none()).collect();
        rest.sort_by(|&a, &b| s.tasks[a].arrival.total_cmp(&s.tasks[b].arrival).then(a.cmp(&b)));
        for i in rest {
            let task = &s.tasks[i];
            let best = (0..s.num_servers())
                .filter_map(|j| {
                    let p = occ.earliest_fit(s, i, j)?;
                    if Some(i) == first && p.start != task.arrival {
                        return None;
                    }
                    let wait = (p.start - task.arrival) / task.slack();
                    let gain = s.urgency_penalty * (s.comm_latency(i) + s.duration(i, j) + wait) - reward;
                    Some((gain, j, p))
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((gain, j, p)) = best {
                if gain < 0.0 || task.urgent {
                    occ.reserve(j, &p);
                    decisions[i] = Some((j, p.start));
                }
            }
        }
        Schedule::from_decisions(s, &decisions)
    }
}

/// Full-model point of a schedule if the model can represent it exactly.
fn lift_schedule(model: &MilpModel, sched: &Schedule) -> Option<(Vec<f64>, f64)> {
    let x = model.solution_from_schedule(sched)?;
    (model.max_violation(&x) <= 1e-7 && model.max_fractionality(&x) == 0.0).then(|| {
        let obj = model.objective_at(&x);
        (x, obj)
    })
}

struct Incumbent(Option<(Vec<f64>, f64)>);

impl Incumbent {
    fn value(&self) -> f64 {
        self.0.as_ref().map_or(f64::INFINITY, |c| c.1)
    }

    fn offer(&mut self, cand: Option<(Vec<f64>, f64)>) {
        if let Some(cand) = cand {
            if cand.1 < self.value() - 1e-12 {
                self.0 = Some(cand);
            }
        }
    }
}

/// Repeatedly fixes the largest fractional column to one (or to zero if that
/// is infeasible) and re-solves, rounding every LP on the way. Returns the
/// number of LPs solved.
fn dive(
    model: &MilpModel,
    proj: &Projection,
    node: &Node,
    opts: &BnbOptions,
    started: Instant,
    incumbent: &mut Incumbent,
) -> Result<usize> {
    let mut fixes = node.fixes.clone();
    let mut y = node.solution.clone();
    let mut basis = node.basis.clone();
    let mut lps = 0;
    let budget = 2 * model.scenario.num_tasks() + 10;
    while lps < budget {
        if opts.time_limit.is_some_and(|t| started.elapsed() >= t) {
            break;
        }
        let pick = y
            .iter()
            .enumerate()
            .filter(|(_, &v)| fractionality(v) > INT_TOL)
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c);
        let Some(c) = pick else {
            incumbent.offer(proj.lift(model, &y));
            break;
        };
        let mut next = None;
        for value in [1.0, 0.0] {
            let mut trial = fixes.clone();
            trial.push(Fix::Col(c, value));
            lps += 1;
            if let Relaxed::Solved { objective, x, basis: b } = proj.relax(&trial, opts.simplex, Some(&basis))? {
                next = Some((trial, objective, x, b));
                break;
            }
        }
        let Some((trial, objective, x, b)) = next else { break };
        if relative_gap(incumbent.value(), objective) <= opts.gap_tol {
            break;
        }
        incumbent.offer(lift_schedule(model, &proj.round(model, &x)));
        (fixes, y, basis) = (trial, x, b);
    }
    Ok(lps)
}

/// Runs branch-and-bound with default options.
pub fn branch_and_bound(model: &MilpModel, gap_tol: f64, node_limit: usize) -> Result<BnbResult> {
    let opts = BnbOptions {
        gap_tol,
        node_limit,
        ..Default::default()
    };
    branch_and_bound_with(model, &opts, &[])
}

/// Branch-and-bound seeded with feasible schedules (e.g. greedy baselines).
/// Schedules the model cannot represent are ignored.
pub fn branch_and_bound_with(model: &MilpModel, opts: &BnbOptions, warm: &[Schedule]) -> Result<BnbResult> {
    let started = Instant::now();
    let mut incumbent = Incumbent(None);
    for sched in warm {
        incumbent.offer(lift_schedule(model, sched));
    }

    let mut incumbent_trace = Vec::new();
    let mut bound_trace = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut dive_lps = 0usize;
    let mut processed = 0usize;
    let mut global_bound;
    let mut status = BnbStatus::Optimal;
    // lowest bound among nodes discarded by the gap test
    let mut pruned_min = f64::INFINITY;

    let proj = Projection::new(model);
    match proj.relax(&[], opts.simplex, None)? {
        Relaxed::Infeasible => {
            // name a task only when it has no placement at all; otherwise the
            // urgent set is jointly unschedulable
            let s = &model.scenario;
            let lonely = (0..s.num_tasks()).find(|&i| s.tasks[i].urgent && model.starts[i].iter().all(Vec::is_empty));
            return Err(OffloadError::UrgentInfeasible { task: lonely });
        }
        Relaxed::Solved { objective, x, basis } => {
            nodes += 1;
            global_bound = objective;
            if proj.branching(&x).is_none() {
                incumbent.offer(proj.lift(model, &x));
            } else {
                incumbent.offer(lift_schedule(model, &proj.round(model, &x)));
            }
            heap.push(Node {
                bound: objective,
                seq,
                fixes: Vec::new(),
                solution: x,
                basis,
            });
            seq += 1;
        }
    }

    while let Some(node) = heap.pop() {
        let inc_val = incumbent.value();
        global_bound = global_bound.max(node.bound.min(inc_val).min(pruned_min));
        if relative_gap(inc_val, node.bound) <= opts.gap_tol {
            pruned_min = pruned_min.min(node.bound);
            heap.clear();
            break;
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            status = BnbStatus::NodeLimit;
            break;
        }
        if opts.time_limit.is_some_and(|t| started.elapsed() >= t) {
            heap.push(node);
            status = BnbStatus::TimeLimit;
            break;
        }

        if opts.dive_interval > 0 && processed.is_multiple_of(opts.dive_interval) {
            dive_lps += dive(model, &proj, &node, opts, started, &mut incumbent)?;
        }
        processed += 1;

        match proj.branching(&node.solution) {
            None => incumbent.offer(proj.lift(model, &node.solution)),
            Some(children) => {
                for fix in children {
                    let mut fixes = node.fixes.clone();
                    fixes.push(fix);
                    nodes += 1;
                    let Relaxed::Solved { objective, x, basis } =
                        proj.relax(&fixes, opts.simplex, Some(&node.basis))?
                    else {
                        continue;
                    };
                    let objective = objective.max(node.bound);
                    if proj.branching(&x).is_none() {
                        if let Some(c) = proj.lift(model, &x) {
                            incumbent.offer(Some(c));
                            continue;
                        }
                    } else {
                        incumbent.offer(lift_schedule(model, &proj.round(model, &x)));
                    }
                    if relative_gap(incumbent.value(), objective) <= opts.gap_tol {
                        pruned_min = pruned_min.min(objective);
                        continue;
                    }
                    heap.push(Node {
                        bound: objective,
                        seq,
                        fixes,
                        solution: x,
                        basis,
                    });
                    seq += 1;
                }
            }
        }
        incumbent_trace.push(incumbent.value());
        bound_trace.push(global_bound);
    }

    let (solution, objective) = match incumbent.0 {
        Some(c) => c,
        // an exhausted tree without a feasible point proves infeasibility
        None if status == BnbStatus::Optimal => return Err(OffloadError::UrgentInfeasible { task: None }),
        None => return Err(OffloadError::NoIncumbent),
    };
    let open_min = heap.peek().map_or(f64::INFINITY, |n| n.bound);
    let best_bound = global_bound.max(objective.min(pruned_min).min(open_min));
    incumbent_trace.push(objective);
    bound_trace.push(best_bound.max(bound_trace.last().copied().unwrap_or(f64::NEG_INFINITY)));
    let schedule = extract_schedule(model, &solution)?;
    Ok(BnbResult {
        status,
        schedule,
        objective,
        best_bound,
        gap: relative_gap(objective, best_bound),
        nodes,
        dive_lps,
        wall_time: started.elapsed(),
        incumbent_trace,
        bound_trace,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::objective_value;
    use crate::milp::model::build_model;
    use crate::model::tests::{scenario, task};

    #[test]
    fn single_task_is_assigned_at_arrival() {
        let mut s = scenario(vec![task(0, 0.0, 0.5, 2.0)], 1, 0.5, 2.5);
        s.tasks[0].size_bits = 1.0;
        s.urgency_penalty = 0.01;
        let m = build_model(&s).unwrap();
        let r = branch_and_bound(&m, 1e-9, 1000).unwrap();
        assert_eq!(r.status, BnbStatus::Optimal);
        assert_eq!(r.schedule.start_times, vec![Some(0.0)]);
        assert!((r.objective - objective_value(&r.schedule, &s).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn traces_are_monotone() {
        let tasks = (0..6)
            .map(|i| task(i, i as f64 * 0.2, 0.6, 2.0 + i as f64 * 0.3))
            .collect();
        let mut s = scenario(tasks, 2, 0.25, 5.0);
        s.urgency_penalty = 0.05;
        let m = build_model(&s).unwrap();
        let r = branch_and_bound(&m, 1e-9, 10_000).unwrap();
        assert!(r.incumbent_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.bound_trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.best_bound <= r.objective + 1e-12);
    }

    #[test]
    fn urgent_overload_is_infeasible() {
        let mut tasks: Vec<_> = (0..3).map(|i| task(i, 0.0, 1.0, 1.2)).collect();
        for t in &mut tasks {
            t.urgent = true;
            t.size_bits = 1.0;
        }
        let s = scenario(tasks, 1, 0.5, 2.0);
        let m = build_model(&s).unwrap();
        assert!(matches!(
            branch_and_bound(&m, 1e-6, 1000),
            Err(OffloadError::UrgentInfeasible { .. })
        ));
    }
}
