use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::latency;
use crate::model::{Scenario, Schedule};

/// Metrics for one class of tasks (all, urgent, or non-urgent). Latencies are
/// per-task means over assigned tasks, in seconds; zero when nothing is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub task_count: usize,
    pub assigned: usize,
    pub comm_latency_s: f64,
    /// Execution time plus waiting seconds.
    pub comp_latency_s: f64,
    pub waiting_s: f64,
    pub waiting_ratio_mean: f64,
    pub dropped_ratio: f64,
}

impl ClassMetrics {
    pub fn total_latency_s(&self) -> f64 {
        self.comm_latency_s + self.comp_latency_s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub all: ClassMetrics,
    pub urgent: ClassMetrics,
    pub non_urgent: ClassMetrics,
    pub objective_value: f64,
    pub replication_count: usize,
}

impl MetricsReport {
    pub fn mean_comm_latency(&self) -> f64 {
        self.all.comm_latency_s
    }

    pub fn mean_comp_latency(&self) -> f64 {
        self.all.comp_latency_s
    }

    pub fn dropped_ratio(&self) -> f64 {
        self.all.dropped_ratio
    }

    /// Arithmetic mean over replications.
    pub fn average(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let k = reports.len() as f64;
        let mean_class = |f: fn(&MetricsReport) -> &ClassMetrics| {
            let mut acc = ClassMetrics::default();
            for r in reports {
                let c = f(r);
                acc.comm_latency_s += c.comm_latency_s / k;
                acc.comp_latency_s += c.comp_latency_s / k;
                acc.waiting_s += c.waiting_s / k;
                acc.waiting_ratio_mean += c.waiting_ratio_mean / k;
                acc.dropped_ratio += c.dropped_ratio / k;
            }
            acc.task_count = f(&reports[0]).task_count;
            acc.assigned = f(&reports[0]).assigned;
            acc
        };
        Some(MetricsReport {
            all: mean_class(|r| &r.all),
            urgent: mean_class(|r| &r.urgent),
            non_urgent: mean_class(|r| &r.non_urgent),
            objective_value: reports.iter().map(|r| r.objective_value / k).sum(),
            replication_count: reports.iter().map(|r| r.replication_count).sum(),
        })
    }
}

fn class_metrics(s: &Scenario, sched: &Schedule, members: &[usize]) -> Result<ClassMetrics> {
    let mut c = ClassMetrics {
        task_count: members.len(),
        ..Default::default()
    };
    for &i in members {
        if let (Some(j), Some(start)) = (sched.assignment[i], sched.start_times[i]) {
            let b = latency::breakdown(s, i, j, start)?;
            c.assigned += 1;
            c.comm_latency_s += b.communication;
            let wait = latency::waiting_seconds(&s.tasks[i], start);
            c.waiting_s += wait;
            c.comp_latency_s += b.execution + wait;
            c.waiting_ratio_mean += b.waiting_ratio;
        }
    }
    if c.assigned > 0 {
        let a = c.assigned as f64;
        c.comm_latency_s /= a;
        c.comp_latency_s /= a;
        c.waiting_s /= a;
        c.waiting_ratio_mean /= a;
    }
    if c.task_count > 0 {
        c.dropped_ratio = (c.task_count - c.assigned) as f64 / c.task_count as f64;
    }
    Ok(c)
}

/// Metrics of a single schedule. The objective is the raw objective value
/// (urgent drops are not penalized here; they show up in `urgent.dropped_ratio`).
pub fn evaluate(s: &Scenario, sched: &Schedule) -> Result<MetricsReport> {
    let all: Vec<usize> = (0..s.num_tasks()).collect();
    let (urgent, non_urgent): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| s.tasks[i].urgent);
    Ok(MetricsReport {
        all: class_metrics(s, sched, &all)?,
        urgent: class_metrics(s, sched, &urgent)?,
        non_urgent: class_metrics(s, sched, &non_urgent)?,
        objective_value: latency::objective_unchecked(s, sched)?,
        replication_count: 1,
    })
}
