//! Closed-form latency, drop and objective quantities.
//!
//! The computational latency adds the dimensionless waiting ratio to the
//! execution time in seconds, exactly as the objective prices them. Reports
//! that need plain seconds use [`waiting_seconds`] instead of the ratio.

use crate::error::{OffloadError, Result};
use crate::model::{
    check_schedule, effective_duration, ChannelParams, Scenario, Schedule, Server, Task, URGENT_DROP_PENALTY,
};

/// Per-task latency components for one placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    /// Waiting ratio `T^w`, dimensionless.
    pub waiting_ratio: f64,
    /// Execution time `T^e` in seconds.
    pub execution: f64,
    /// `T^e + T^w`.
    pub computational: f64,
    /// Roundtrip communication latency `T^t` in seconds.
    pub communication: f64,
}

/// `(t_s - t_a) / (t_d - t_a - t_c)`.
pub fn waiting_ratio(task: &Task, start: f64) -> Result<f64> {
    let slack = task.slack();
    if !(slack > 0.0) {
        return Err(OffloadError::DegenerateSlack { task: task.id, slack });
    }
    if start < task.arrival {
        return Err(OffloadError::StartBeforeArrival {
            task: task.id,
            start,
            arrival: task.arrival,
        });
    }
    Ok((start - task.arrival) / slack)
}

pub fn waiting_seconds(task: &Task, start: f64) -> f64 {
    start - task.arrival
}

/// Shannon capacity `B log2(1 + p g / N0)` in bits per second.
pub fn uplink_rate(ch: &ChannelParams) -> f64 {
    ch.bandwidth * (1.0 + ch.tx_power * ch.channel_gain / ch.noise_power_density).log2()
}

/// Roundtrip communication latency `2 S / r`.
pub fn comm_latency(task: &Task, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(OffloadError::NonPositiveRate(rate));
    }
    Ok(2.0 * task.size_bits / rate)
}

/// `C/f + T^w`.
pub fn computational_latency(task: &Task, server: &Server, start: f64) -> Result<f64> {
    Ok(effective_duration(task, server) + waiting_ratio(task, start)?)
}

pub fn breakdown(s: &Scenario, i: usize, j: usize, start: f64) -> Result<LatencyBreakdown> {
    let task = &s.tasks[i];
    let waiting_ratio = waiting_ratio(task, start)?;
    let execution = effective_duration(task, &s.servers[j]);
    Ok(LatencyBreakdown {
        waiting_ratio,
        execution,
        computational: execution + waiting_ratio,
        communication: s.comm_latency(i),
    })
}

/// The two readings of the drop term for a schedule over `n` tasks and `m` servers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropRatio {
    /// `(N - assigned) / N`, the reported metric.
    pub reported: f64,
    /// `sum_ij (1 - x_ij) / N = M - assigned / N`, the objective's drop term.
    pub raw: f64,
}

pub fn dropped_ratio(sched: &Schedule, n: usize, m: usize) -> Result<DropRatio> {
    if n == 0 {
        return Err(OffloadError::DivisionByZero("dropped ratio over zero tasks"));
    }
    let assigned = sched.assigned_count() as f64;
    let n = n as f64;
    Ok(DropRatio {
        reported: (n - assigned) / n,
        raw: m as f64 - assigned / n,
    })
}

/// Drop term straight from the double sum, one `x_ij` at a time.
pub fn raw_drop_sum(sched: &Schedule, n: usize, m: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 0..m {
        for a in &sched.assignment {
            let x = if *a == Some(j) { 1.0 } else { 0.0 };
            sum += (1.0 - x) / n as f64;
        }
    }
    sum
}

/// Weighted latency term `delta (T^w + C/f + T^t)` of one assigned task.
pub fn task_cost(s: &Scenario, i: usize, j: usize, start: f64) -> Result<f64> {
    let b = breakdown(s, i, j, start)?;
    Ok(s.urgency_penalty * (b.waiting_ratio + b.execution + b.communication))
}

/// Objective value without a feasibility check: weighted latency of assigned
/// tasks plus the raw drop term.
pub fn objective_unchecked(s: &Scenario, sched: &Schedule) -> Result<f64> {
    let n = s.num_tasks();
    let mut latency = 0.0;
    for i in 0..n {
        if let (Some(j), Some(start)) = (sched.assignment[i], sched.start_times[i]) {
            latency += task_cost(s, i, j, start)?;
        }
    }
    let drop = if n == 0 {
        0.0
    } else {
        s.num_servers() as f64 - sched.assigned_count() as f64 / n as f64
    };
    Ok(latency + drop)
}

/// Objective value of a feasible schedule.
pub fn objective_value(sched: &Schedule, s: &Scenario) -> Result<f64> {
    check_schedule(s, sched).map_err(OffloadError::InfeasibleSchedule)?;
    objective_unchecked(s, sched)
}

/// Objective plus the dominating penalty for each dropped urgent task. Does not
/// require the schedule to keep urgent tasks.
pub fn penalized_objective(s: &Scenario, sched: &Schedule) -> Result<f64> {
    let urgent_dropped = s
        .tasks
        .iter()
        .enumerate()
        .filter(|(i, t)| t.urgent && !sched.is_assigned(*i))
        .count();
    Ok(objective_unchecked(s, sched)? + URGENT_DROP_PENALTY * urgent_dropped as f64)
}

/// Relative gap `(alg - milp) / alg` of an algorithm against the exact optimum.
pub fn efficiency_vs(alg_value: f64, milp_value: f64) -> Result<f64> {
    if alg_value == 0.0 {
        return Err(OffloadError::DivisionByZero("efficiency against a zero value"));
    }
    Ok((alg_value - milp_value) / alg_value)
}
