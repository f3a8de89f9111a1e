//! Exhaustive optimizer for tiny instances, the referee for every other solver.
//!
//! Every assignment vector in `{0..M}^N` is tried; on each server every
//! ordering of its tasks is run with earliest starts on the slot grid. Nothing
//! is pruned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{OffloadError, Result};
use crate::exec::Exec;
use crate::latency::{penalized_objective, task_cost};
use crate::model::{Scenario, Schedule, Server, Task, REFERENCE_CPU_HZ, URGENT_DROP_PENALTY};
use crate::workload::auto_delta;

pub const MAX_TASKS: usize = 8;
pub const MAX_SERVERS: usize = 2;
pub const MAX_SLOTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub schedule: Schedule,
    /// Assignment vectors times the orderings tried under each.
    pub candidates: u64,
}

fn check_caps(s: &Scenario) -> Result<()> {
    let too_large = |what: String| Err(OffloadError::InstanceTooLarge(what));
    if s.num_tasks() > MAX_TASKS {
        return too_large(format!("{} tasks, oracle limit {MAX_TASKS}", s.num_tasks()));
    }
    if s.num_servers() > MAX_SERVERS {
        return too_large(format!("{} servers, oracle limit {MAX_SERVERS}", s.num_servers()));
    }
    if s.slot_count() > MAX_SLOTS {
        return too_large(format!("{} slots, oracle limit {MAX_SLOTS}", s.slot_count()));
    }
    if s.servers.iter().any(|srv| srv.cpu_count != 1) {
        return too_large("the oracle sequences single-CPU servers only".into());
    }
    Ok(())
}

/// Heap's algorithm, calling `visit` on every permutation.
fn for_each_permutation(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Starts of `order` run back to back on server `j`, or `None` if a task
/// misses its window or the pinned first task cannot start on arrival.
fn sequence(s: &Scenario, j: usize, order: &[usize], first: Option<usize>) -> Option<(f64, Vec<f64>)> {
    let mut free = 0usize;
    let mut cost = 0.0;
    let mut starts = Vec::with_capacity(order.len());
    for &i in order {
        let k = s.slot_of(s.tasks[i].arrival).max(free);
        let p = s.placement(i, j, k)?;
        if Some(i) == first && p.start != s.tasks[i].arrival {
            return None;
        }
        free = p.end_slot;
        cost += task_cost(s, i, j, p.start).ok()?;
        starts.push(p.start);
    }
    Some((cost, starts))
}

struct Best {
    objective: f64,
    decisions: Vec<Option<(usize, f64)>>,
    candidates: u64,
}

fn evaluate_assignment(s: &Scenario, genes: &[usize]) -> Best {
    let n = s.num_tasks();
    let first = s.first_task();
    let mut decisions = vec![None; n];
    let mut candidates = 1u64;
    let mut latency = 0.0;
    for j in 0..s.num_servers() {
        let mut tasks: Vec<usize> = (0..n).filter(|&i| genes[i] == j + 1).collect();
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        let mut tried = 0u64;
        for_each_permutation(&mut tasks, &mut |order| {
            tried += 1;
            if let Some((cost, starts)) = sequence(s, j, order, first) {
                let better = match &best {
                    None => true,
                    Some((c, o, _)) => cost < *c || (cost == *c && order < o.as_slice()),
                };
                if better {
                    best = Some((cost, order.to_vec(), starts));
                }
            }
        });
        candidates *= tried;
        let Some((cost, order, starts)) = best else {
            return Best {
                objective: f64::INFINITY,
                decisions,
                candidates,
            };
        };
        latency += cost;
        for (i, t) in order.into_iter().zip(starts) {
            decisions[i] = Some((j, t));
        }
    }
    let assigned = decisions.iter().filter(|d| d.is_some()).count();
    let urgent_dropped = (0..n).filter(|&i| s.tasks[i].urgent && decisions[i].is_none()).count();
    let drop = if n == 0 {
        0.0
    } else {
        s.num_servers() as f64 - assigned as f64 / n as f64
    };
    Best {
        objective: latency + drop + URGENT_DROP_PENALTY * urgent_dropped as f64,
        decisions,
        candidates,
    }
}

fn decode_index(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut genes = vec![0; n];
    // most significant digit first, so index order is lexicographic order
    for g in genes.iter_mut().rev() {
        *g = index % base;
        index /= base;
    }
    genes
}

/// Exact minimum of the objective plus urgent-drop penalty over the slot grid.
pub fn enumerate_optimal(s: &Scenario) -> Result<OracleResult> {
    enumerate_optimal_with(s, Exec::default())
}

pub fn enumerate_optimal_with(s: &Scenario, exec: Exec) -> Result<OracleResult> {
    check_caps(s)?;
    let n = s.num_tasks();
    let base = s.num_servers() + 1;
    let total = base.pow(n as u32);
    let results = exec.map_range(total, |idx| evaluate_assignment(s, &decode_index(idx, base, n)));
    let candidates = results.iter().map(|b| b.candidates).sum();
    // ties go to the lowest index, i.e. the lexicographically smallest assignment
    let best = results
        .into_iter()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .expect("at least the empty assignment");
    let schedule = Schedule::from_decisions(s, &best.decisions);
    // re-evaluate through the latency module rather than trusting the running sum
    let objective = penalized_objective(s, &schedule)?;
    Ok(OracleResult {
        objective,
        schedule,
        candidates,
    })
}

/// Random instance inside the oracle caps: 1 to 8 tasks, 1 or 2 servers (the
/// second 30% faster), at most 20 slots and at most one urgent task, so an
/// urgent-feasible schedule always exists.
pub fn random_instance(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=MAX_TASKS);
    let m = rng.random_range(1..=MAX_SERVERS);
    let mut tasks: Vec<Task> = (0..n)
        .map(|id| {
            let arrival = rng.random_range(0.0..2.0);
            let t_c = rng.random_range(0.2..0.9);
            let slack = rng.random_range(0.1..1.5);
            Task {
                id,
                ue_id: id,
                arrival,
                size_bits: rng.random_range(1e5..2e6),
                cycles: t_c * REFERENCE_CPU_HZ,
                deadline: arrival + t_c + slack,
                processing_time: t_c,
                urgent: false,
            }
        })
        .collect();
    if rng.random_bool(0.5) {
        let k = rng.random_range(0..n);
        tasks[k].urgent = true;
    }
    tasks.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
    for (k, t) in tasks.iter_mut().enumerate() {
        t.id = k;
    }
    let max_deadline = tasks.iter().map(|t| t.deadline).fold(0.0, f64::max);
    let width = (max_deadline / (MAX_SLOTS - 1) as f64).max(0.2);
    let slots = (max_deadline / width - 1e-9).ceil() as usize + 1;
    let servers = (0..m)
        .map(|j| Server::new(j, REFERENCE_CPU_HZ * if j == 1 { 1.3 } else { 1.0 }))
        .collect();
    let mut s = Scenario {
        tasks,
        servers,
        channel: Default::default(),
        channel_overrides: Default::default(),
        urgency_penalty: 1.0,
        slot_width: width,
        horizon: slots as f64 * width,
        rng_seed: seed,
    };
    s.urgency_penalty = auto_delta(&s);
    s
}
