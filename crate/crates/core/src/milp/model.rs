//! The linearized mixed-integer model.
//!
//! Variables, per task `i` and server `j`:
//! * `x_i_j` binary assignment,
//! * `ts_i` continuous start time,
//! * `y_i_j_k` binary, task `i` starts on `j` in slot `k` (one per feasible placement),
//! * `m_i_t_j` binary slot occupancy, only for slots the task can reach on `j`,
//! * `tm_i_t_j = x_i_j * m_i_t_j`, `to_i_j = T^t_i * x_i_j`,
//!   `tc_i_j = T^c_ij * x_i_j`, each linearized by the three-row pattern
//!   `B - A <= 0`, `B - U x <= 0`, `U x + A - B <= U` with `U` the maximum of `A`.
//!
//! The objective is `delta * sum(tc + to) + sum_ij (1 - x_ij) / N`.

use crate::error::{OffloadError, Result};
use crate::milp::simplex::{LpProblem, SparseRow};
use crate::model::{ensure_valid, Scenario, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFamily {
    /// At most one server per task.
    AssignOnce,
    /// Urgent tasks must be placed.
    UrgentAssigned,
    /// Exactly one start slot when assigned.
    StartSelect,
    /// Start time from the chosen start slot.
    StartTime,
    /// The earliest task starts on arrival.
    FirstStart,
    /// Occupancy from the chosen start slot (contiguous run).
    Occupancy,
    /// CPUs per server and slot.
    Capacity,
    /// Occupied time within the rounded processing time.
    ProcessingTime,
    /// One of the three rows of a product linearization.
    Product,
    /// Valid inequality tying `tc` to the chosen start slot; tightens the
    /// relaxation without cutting off integer points.
    StartCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub family: RowFamily,
}

/// Which product a linearization triple encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    /// `x_ij * m_itj`.
    Occupancy { task: usize, slot: usize, server: usize },
    /// `T^t_i * x_ij`.
    Communication { task: usize, server: usize },
    /// `T^c_ij * x_ij`.
    Computational { task: usize, server: usize },
}

/// `B = x * A` with `A = constant + sum(coeff * var)` and `0 <= A <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub kind: ProductKind,
    pub product: usize,
    pub binary: usize,
    pub factor_terms: Vec<(usize, f64)>,
    pub factor_constant: f64,
    /// Big-M, the maximum of the factor.
    pub bound: f64,
    /// Rows `B - A <= 0`, `B - U x <= 0`, `U x + A - B <= U`.
    pub rows: [usize; 3],
}

impl Product {
    pub fn factor_value(&self, x: &[f64]) -> f64 {
        self.factor_constant + self.factor_terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StartVar {
    pub var: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_variables: usize,
    pub max_slots: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_variables: 200_000,
            max_slots: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub scenario: Scenario,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
    /// `[task][server]`.
    pub x: Vec<Vec<usize>>,
    pub ts: Vec<usize>,
    /// `[task][server]`, ordered by slot.
    pub starts: Vec<Vec<Vec<StartVar>>>,
    /// `[task][server]` -> `(slot, m var, tm var)`.
    pub occupancy: Vec<Vec<Vec<(usize, usize, usize)>>>,
    pub comm: Vec<Vec<usize>>,
    pub comp: Vec<Vec<usize>>,
    pub products: Vec<Product>,
}

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64, family: RowFamily) -> usize {
        self.constraints.push(Constraint {
            name,
            coeffs,
            sense,
            rhs,
            family,
        });
        self.constraints.len() - 1
    }

    /// Adds the three rows of `b = x * (constant + terms)`.
    #[allow(clippy::too_many_arguments)]
    fn product(
        &mut self,
        name: &str,
        kind: ProductKind,
        b: usize,
        x: usize,
        terms: Vec<(usize, f64)>,
        constant: f64,
        bound: f64,
    ) -> Product {
        let mut r1 = vec![(b, 1.0)];
        r1.extend(terms.iter().map(|&(v, c)| (v, -c)));
        let r1 = self.row(format!("{name}_a"), r1, Sense::Le, constant, RowFamily::Product);
        let r2 = self.row(
            format!("{name}_x"),
            vec![(b, 1.0), (x, -bound)],
            Sense::Le,
            0.0,
            RowFamily::Product,
        );
        let mut r3 = vec![(x, bound)];
        r3.extend(terms.iter().copied());
        r3.push((b, -1.0));
        let r3 = self.row(format!("{name}_u"), r3, Sense::Le, bound - constant, RowFamily::Product);
        Product {
            kind,
            product: b,
            binary: x,
            factor_terms: terms,
            factor_constant: constant,
            bound,
            rows: [r1, r2, r3],
        }
    }
}

/// Builds the linearized model of a scenario.
pub fn build_model(s: &Scenario) -> Result<MilpModel> {
    build_model_with(s, BuildOptions::default())
}

pub fn build_model_with(s: &Scenario, opts: BuildOptions) -> Result<MilpModel> {
    ensure_valid(s)?;
    let n = s.num_tasks();
    let m = s.num_servers();
    let slots = s.slot_count();
    if slots > opts.max_slots {
        return Err(OffloadError::Config(format!(
            "{slots} slots exceeds the model limit of {}",
            opts.max_slots
        )));
    }

    let placements: Vec<Vec<_>> = (0..n).map(|i| (0..m).map(|j| s.placements(i, j)).collect()).collect();
    let estimate: usize = placements
        .iter()
        .flatten()
        .map(|ps| {
            let reach = ps.last().map_or(0, |p| p.end_slot) - ps.first().map_or(0, |p| p.first_slot);
            ps.len() + 2 * reach + 3
        })
        .sum::<usize>()
        + n;
    if estimate > opts.max_variables {
        return Err(OffloadError::ModelTooLarge {
            variables: estimate,
            cap: opts.max_variables,
        });
    }

    let mut b = Builder {
        variables: Vec::with_capacity(estimate),
        constraints: Vec::new(),
    };
    let mut x = vec![vec![0; m]; n];
    let mut ts = vec![0; n];
    let mut starts = vec![vec![Vec::new(); m]; n];
    let mut occupancy = vec![vec![Vec::new(); m]; n];
    let mut comm = vec![vec![0; m]; n];
    let mut comp = vec![vec![0; m]; n];
    let mut products = Vec::new();
    let mut objective = Vec::new();
    let delta = s.urgency_penalty;
    let drop_weight = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let mut slot_users: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); slots]; m];

    for i in 0..n {
        let task = &s.tasks[i];
        let latest = s.latest_start(i).max(task.arrival);
        ts[i] = b.var(format!("ts_{i}"), VarKind::Continuous, task.arrival, latest);
        for j in 0..m {
            let ps = &placements[i][j];
            let ub = if ps.is_empty() { 0.0 } else { 1.0 };
            x[i][j] = b.var(format!("x_{i}_{j}"), VarKind::Binary, 0.0, ub);
            objective.push((x[i][j], -drop_weight));
            for p in ps {
                let v = b.var(format!("y_{i}_{j}_{}", p.first_slot), VarKind::Binary, 0.0, 1.0);
                starts[i][j].push(StartVar {
                    var: v,
                    slot: p.first_slot,
                });
            }
            if let (Some(first), Some(last)) = (ps.first(), ps.last()) {
                for t in first.first_slot..last.end_slot {
                    let mv = b.var(format!("m_{i}_{t}_{j}"), VarKind::Binary, 0.0, 1.0);
                    let tv = b.var(format!("tm_{i}_{t}_{j}"), VarKind::Continuous, 0.0, 1.0);
                    occupancy[i][j].push((t, mv, tv));
                    slot_users[j][t].push(mv);
                }
            }
            let tt = s.comm_latency(i);
            comm[i][j] = b.var(format!("to_{i}_{j}"), VarKind::Continuous, 0.0, tt);
            let exec = s.duration(i, j);
            comp[i][j] = b.var(format!("tc_{i}_{j}"), VarKind::Continuous, 0.0, 1.0 + exec);
            objective.push((comm[i][j], delta));
            objective.push((comp[i][j], delta));
        }
    }

    for i in 0..n {
        let task = &s.tasks[i];
        let row: Vec<(usize, f64)> = (0..m).map(|j| (x[i][j], 1.0)).collect();
        if task.urgent {
            b.row(format!("urgent_{i}"), row, Sense::Eq, 1.0, RowFamily::UrgentAssigned);
        } else {
            b.row(format!("assign_{i}"), row, Sense::Le, 1.0, RowFamily::AssignOnce);
        }

        let mut start_row = vec![(ts[i], 1.0)];
        for j in 0..m {
            let mut sel = vec![(x[i][j], -1.0)];
            sel.extend(starts[i][j].iter().map(|sv| (sv.var, 1.0)));
            b.row(format!("select_{i}_{j}"), sel, Sense::Eq, 0.0, RowFamily::StartSelect);
            for (sv, p) in starts[i][j].iter().zip(&placements[i][j]) {
                let offset = p.start - task.arrival;
                if offset != 0.0 {
                    start_row.push((sv.var, -offset));
                }
            }
        }
        b.row(
            format!("start_{i}"),
            start_row,
            Sense::Eq,
            task.arrival,
            RowFamily::StartTime,
        );

        let mut busy_row = Vec::new();
        let mut max_slots = 0usize;
        for j in 0..m {
            for &(t, mv, tv) in &occupancy[i][j] {
                let mut row = vec![(mv, 1.0)];
                for (sv, p) in starts[i][j].iter().zip(&placements[i][j]) {
                    if p.slots().contains(&t) {
                        row.push((sv.var, -1.0));
                    }
                }
                b.row(format!("occ_{i}_{t}_{j}"), row, Sense::Eq, 0.0, RowFamily::Occupancy);
                let prod = b.product(
                    &format!("lin_tm_{i}_{t}_{j}"),
                    ProductKind::Occupancy {
                        task: i,
                        slot: t,
                        server: j,
                    },
                    tv,
                    x[i][j],
                    vec![(mv, 1.0)],
                    0.0,
                    1.0,
                );
                products.push(prod);
                busy_row.push((tv, s.slot_width));
            }
            max_slots = max_slots.max(
                placements[i][j]
                    .iter()
                    .map(|p| p.end_slot - p.first_slot)
                    .max()
                    .unwrap_or(0),
            );
        }
        if !busy_row.is_empty() {
            b.row(
                format!("busy_{i}"),
                busy_row,
                Sense::Le,
                max_slots as f64 * s.slot_width,
                RowFamily::ProcessingTime,
            );
        }

        let tt = s.comm_latency(i);
        let slack = task.slack();
        for j in 0..m {
            let to = b.product(
                &format!("lin_to_{i}_{j}"),
                ProductKind::Communication { task: i, server: j },
                comm[i][j],
                x[i][j],
                Vec::new(),
                tt,
                tt,
            );
            products.push(to);
            let exec = s.duration(i, j);
            let tc = b.product(
                &format!("lin_tc_{i}_{j}"),
                ProductKind::Computational { task: i, server: j },
                comp[i][j],
                x[i][j],
                vec![(ts[i], 1.0 / slack)],
                exec - task.arrival / slack,
                1.0 + exec,
            );
            products.push(tc);
            let mut cut = vec![(x[i][j], exec)];
            for (sv, p) in starts[i][j].iter().zip(&placements[i][j]) {
                let wait = (p.start - task.arrival) / slack;
                if wait != 0.0 {
                    cut.push((sv.var, wait));
                }
            }
            cut.push((comp[i][j], -1.0));
            b.row(format!("tcl_{i}_{j}"), cut, Sense::Le, 0.0, RowFamily::StartCost);
        }
    }

    if let Some(f) = s.first_task() {
        b.row(
            format!("first_{f}"),
            vec![(ts[f], 1.0)],
            Sense::Eq,
            s.tasks[f].arrival,
            RowFamily::FirstStart,
        );
    }

    for (j, per_slot) in slot_users.iter().enumerate() {
        for (t, users) in per_slot.iter().enumerate() {
            if users.len() > s.servers[j].cpu_count as usize {
                b.row(
                    format!("cap_{j}_{t}"),
                    users.iter().map(|&v| (v, 1.0)).collect(),
                    Sense::Le,
                    s.servers[j].cpu_count as f64,
                    RowFamily::Capacity,
                );
            }
        }
    }

    let objective_constant = if n == 0 { 0.0 } else { m as f64 };
    Ok(MilpModel {
        scenario: s.clone(),
        variables: b.variables,
        objective,
        objective_constant,
        constraints: b.constraints,
        x,
        ts,
        starts,
        occupancy,
        comm,
        comp,
        products,
    })
}

impl MilpModel {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind != VarKind::Continuous)
            .map(|(k, _)| k)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    /// Continuous relaxation with per-variable bounds.
    pub fn relaxation(&self, bounds: &[(f64, f64)]) -> LpProblem {
        let mut cost = vec![0.0; self.variables.len()];
        for &(v, c) in &self.objective {
            cost[v] += c;
        }
        let mut p = LpProblem {
            col_lower: bounds.iter().map(|b| b.0).collect(),
            col_upper: bounds.iter().map(|b| b.1).collect(),
            cost,
            rows: Vec::with_capacity(self.constraints.len()),
            row_lower: Vec::with_capacity(self.constraints.len()),
            row_upper: Vec::with_capacity(self.constraints.len()),
        };
        for c in &self.constraints {
            p.rows.push(SparseRow {
                idx: c.coeffs.iter().map(|t| t.0).collect(),
                val: c.coeffs.iter().map(|t| t.1).collect(),
            });
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            p.row_lower.push(lo);
            p.row_upper.push(hi);
        }
        p
    }

    pub fn default_bounds(&self) -> Vec<(f64, f64)> {
        self.variables.iter().map(|v| (v.lower, v.upper)).collect()
    }

    /// Largest row or bound violation of a full variable vector.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.relaxation(&self.default_bounds()).max_violation(x)
    }

    /// Largest distance of a binary variable from the nearest integer.
    pub fn max_fractionality(&self, x: &[f64]) -> f64 {
        self.binaries().map(|v| (x[v] - x[v].round()).abs()).fold(0.0, f64::max)
    }

    /// The model point that encodes a schedule. `None` when the schedule uses
    /// a placement the model does not contain.
    pub fn solution_from_schedule(&self, sched: &Schedule) -> Option<Vec<f64>> {
        let s = &self.scenario;
        let mut x = vec![0.0; self.variables.len()];
        for i in 0..s.num_tasks() {
            x[self.ts[i]] = s.tasks[i].arrival;
            let (Some(j), Some(start)) = (sched.assignment[i], sched.start_times[i]) else {
                continue;
            };
            let k = s.slot_of(start);
            let sv = self.starts[i][j].iter().find(|sv| sv.slot == k)?;
            let p = s.placement(i, j, k)?;
            x[sv.var] = 1.0;
            x[self.x[i][j]] = 1.0;
            x[self.ts[i]] = p.start;
            for &(t, mv, tv) in &self.occupancy[i][j] {
                if p.slots().contains(&t) {
                    x[mv] = 1.0;
                    x[tv] = 1.0;
                }
            }
            x[self.comm[i][j]] = s.comm_latency(i);
            x[self.comp[i][j]] = s.duration(i, j) + (p.start - s.tasks[i].arrival) / s.tasks[i].slack();
        }
        Some(x)
    }
}

/// Reads a schedule out of an integral model point.
pub fn extract_schedule(model: &MilpModel, sol: &[f64]) -> Result<Schedule> {
    for v in model.binaries() {
        if (sol[v] - sol[v].round()).abs() > 1e-6 {
            return Err(OffloadError::Fractional {
                variable: model.variables[v].name.clone(),
                value: sol[v],
            });
        }
    }
    let s = &model.scenario;
    let mut decisions = vec![None; s.num_tasks()];
    for i in 0..s.num_tasks() {
        for j in 0..s.num_servers() {
            if sol[model.x[i][j]] < 0.5 {
                continue;
            }
            let sv =
                model.starts[i][j]
                    .iter()
                    .find(|sv| sol[sv.var] > 0.5)
                    .ok_or_else(|| OffloadError::Fractional {
                        variable: format!("start slot of x_{i}_{j}"),
                        value: 0.0,
                    })?;
            let p = s.placement(i, j, sv.slot).expect("start variables mirror placements");
            decisions[i] = Some((j, p.start));
        }
    }
    let sched = Schedule::from_decisions(s, &decisions);
    crate::model::check_schedule(s, &sched).map_err(OffloadError::InfeasibleSchedule)?;
    Ok(sched)
}
