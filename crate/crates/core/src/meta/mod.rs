//! GA and PSO over an integer genome: gene `0` drops the task, gene `k > 0`
//! sends it to server `k - 1`.

pub mod ga;
pub mod pso;

use std::fmt::Write;

use crate::latency::penalized_objective;
use crate::model::{Scenario, Schedule};
use crate::timeline::Occupancy;

pub use ga::{run_ga, run_ga_with, GaParams};
pub use pso::{run_pso, run_pso_with, PsoParams};

pub type Genome = Vec<usize>;

/// Best-so-far objective per iteration; entry 0 is the initial population.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub best: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.best.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn final_value(&self) -> Option<f64> {
        self.best.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,best_objective\n");
        for (k, v) in self.best.iter().enumerate() {
            let _ = writeln!(out, "{k},{v:?}");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicOutcome {
    pub schedule: Schedule,
    pub genome: Genome,
    pub fitness: f64,
    pub trace: ConvergenceTrace,
}

/// Placement order: the pinned first task, then urgent tasks, then the rest,
/// each group by arrival.
fn placement_order(s: &Scenario) -> Vec<usize> {
    let first = s.first_task();
    let mut order: Vec<usize> = (0..s.num_tasks()).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (&s.tasks[a], &s.tasks[b]);
        (Some(b) == first)
            .cmp(&(Some(a) == first))
            .then(tb.urgent.cmp(&ta.urgent))
            .then(ta.arrival.total_cmp(&tb.arrival))
            .then(ta.id.cmp(&tb.id))
    });
    order
}

/// Earliest feasible start for every assigned gene; tasks that no longer fit
/// their window are dropped.
pub fn decode(g: &[usize], s: &Scenario) -> Schedule {
    assert_eq!(g.len(), s.num_tasks(), "genome length must equal task count");
    let mut occ = Occupancy::new(s);
    let mut decisions = vec![None; s.num_tasks()];
    let first = s.first_task();
    for i in placement_order(s) {
        let Some(j) = g[i].checked_sub(1) else { continue };
        if let Some(p) = occ.earliest_fit(s, i, j) {
            if Some(i) == first && p.start != s.tasks[i].arrival {
                continue;
            }
            occ.reserve(j, &p);
            decisions[i] = Some((j, p.start));
        }
    }
    Schedule::from_decisions(s, &decisions)
}

/// Objective of the decoded schedule plus the urgent-drop penalty.
pub fn fitness(g: &[usize], s: &Scenario) -> f64 {
    penalized_objective(s, &decode(g, s)).expect("decoded schedules satisfy the latency preconditions")
}

/// Moves every unplaced urgent task to the server giving the lowest fitness.
/// Returns the fitness of the repaired genome.
pub fn repair(g: &mut [usize], s: &Scenario) -> f64 {
    let mut sched = decode(g, s);
    let mut value = penalized_objective(s, &sched).expect("valid decode");
    for i in 0..s.num_tasks() {
        if !s.tasks[i].urgent || sched.is_assigned(i) {
            continue;
        }
        let original = g[i];
        let mut best = (value, original);
        for gene in 1..=s.num_servers() {
            if gene == original {
                continue;
            }
            g[i] = gene;
            let v = fitness(g, s);
            if v < best.0 {
                best = (v, gene);
            }
        }
        g[i] = best.1;
        if best.1 != original {
            value = best.0;
            sched = decode(g, s);
        }
    }
    value
}
