//! FCFS and STF baselines: an event-driven queue simulation with urgent tasks
//! served ahead of non-urgent ones and deadline-based dropping.

use std::cmp::Ordering;

use crate::model::{Scenario, Schedule, TIME_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    /// First come, first served.
    Fcfs,
    /// Shortest task first.
    Stf,
}

/// Ordering key of a waiting task. Urgent entries sort before non-urgent ones
/// whatever their key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEntry {
    pub task: usize,
    pub urgent: bool,
    pub key: f64,
    pub arrival: f64,
    pub id: usize,
}

impl QueueEntry {
    pub fn new(s: &Scenario, i: usize, discipline: Discipline) -> Self {
        let t = &s.tasks[i];
        QueueEntry {
            task: i,
            urgent: t.urgent,
            key: match discipline {
                Discipline::Fcfs => t.arrival,
                Discipline::Stf => t.processing_time,
            },
            arrival: t.arrival,
            id: t.id,
        }
    }

    pub fn priority_cmp(&self, other: &Self) -> Ordering {
        other
            .urgent
            .cmp(&self.urgent)
            .then(self.key.total_cmp(&other.key))
            .then(self.arrival.total_cmp(&other.arrival))
            .then(self.id.cmp(&other.id))
    }
}

struct Lane {
    server: usize,
    free_slot: usize,
}

pub fn schedule_fcfs(s: &Scenario) -> Schedule {
    schedule_greedy(s, Discipline::Fcfs)
}

pub fn schedule_stf(s: &Scenario) -> Schedule {
    schedule_greedy(s, Discipline::Stf)
}

pub fn schedule_greedy(s: &Scenario, discipline: Discipline) -> Schedule {
    let dt = s.slot_width;
    let mut lanes: Vec<Lane> = s
        .servers
        .iter()
        .enumerate()
        .flat_map(|(j, srv)| {
            (0..srv.cpu_count).map(move |_| Lane {
                server: j,
                free_slot: 0,
            })
        })
        .collect();

    let mut pending: Vec<usize> = (0..s.num_tasks()).collect();
    pending.sort_by(|&a, &b| {
        s.tasks[a]
            .arrival
            .total_cmp(&s.tasks[b].arrival)
            .then(s.tasks[a].id.cmp(&s.tasks[b].id))
    });
    let mut pending = pending.into_iter().peekable();
    let mut waiting: Vec<QueueEntry> = Vec::new();
    let mut decisions: Vec<Option<(usize, f64)>> = vec![None; s.num_tasks()];

    let mut now = match pending.peek() {
        Some(&i) => s.tasks[i].arrival,
        None => return Schedule::empty(s),
    };

    loop {
        while let Some(&i) = pending.peek() {
            if s.tasks[i].arrival > now + TIME_EPS {
                break;
            }
            waiting.push(QueueEntry::new(s, i, discipline));
            pending.next();
        }
        // a waiting task whose latest start has passed is dropped
        waiting.retain(|e| s.latest_start(e.task) + TIME_EPS >= now);

        let k = s.slot_of(now);
        while !waiting.is_empty() {
            let lane = lanes
                .iter_mut()
                .filter(|l| l.free_slot as f64 * dt <= now + TIME_EPS)
                .min_by_key(|l| (l.free_slot, l.server));
            let Some(lane) = lane else { break };
            let best = (0..waiting.len())
                .min_by(|&a, &b| waiting[a].priority_cmp(&waiting[b]))
                .expect("non-empty");
            let entry = waiting.swap_remove(best);
            if let Some(p) = s.placement(entry.task, lane.server, k.max(lane.free_slot)) {
                lane.free_slot = p.end_slot;
                decisions[entry.task] = Some((lane.server, p.start));
            }
        }

        let next_arrival = pending.peek().map(|&i| s.tasks[i].arrival);
        let next_free = if waiting.is_empty() {
            None
        } else {
            lanes
                .iter()
                .map(|l| l.free_slot as f64 * dt)
                .filter(|&t| t > now + TIME_EPS)
                .min_by(f64::total_cmp)
        };
        now = match (next_arrival, next_free) {
            (Some(a), Some(f)) => a.min(f),
            (Some(a), None) => a,
            (None, Some(f)) => f,
            (None, None) => break,
        };
    }
    Schedule::from_decisions(s, &decisions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_schedule;
    use crate::model::tests::{scenario, task};

    fn tiny_size(mut s: Scenario) -> Scenario {
        for t in &mut s.tasks {
            t.size_bits = 1.0;
        }
        s
    }

    #[test]
    fn no_contention_runs_in_arrival_order() {
        let tasks = (0..3).map(|i| task(i, i as f64, 1.0, 20.0)).collect();
        let s = tiny_size(scenario(tasks, 1, 0.5, 21.0));
        let sched = schedule_fcfs(&s);
        assert_eq!(sched.start_times, vec![Some(0.0), Some(1.0), Some(2.0)]);
        check_schedule(&s, &sched).unwrap();
    }

    #[test]
    fn hopeless_task_dropped() {
        let mut tasks = vec![task(0, 0.0, 1.0, 20.0)];
        // comm latency makes the window empty
        let mut t = task(1, 1.0, 1.0, 2.05);
        t.size_bits = 5e6;
        tasks.push(t);
        let s = scenario(tasks, 2, 0.5, 21.0);
        let sched = schedule_fcfs(&s);
        assert!(sched.assignment[1].is_none());
    }

    #[test]
    fn two_servers_tight_deadlines() {
        let s = tiny_size(scenario(
            (0..4).map(|i| task(i, 0.0, 1.0, 1.5 + 4e-8)).collect(),
            2,
            0.5,
            2.0,
        ));
        let sched = schedule_fcfs(&s);
        assert_eq!(sched.assigned_count(), 2);
        check_schedule(&s, &sched).unwrap();
    }

    #[test]
    fn stf_orders_by_duration() {
        // task 0 occupies the server while 1..=3 queue up
        let mut tasks = vec![task(0, 0.0, 1.0, 50.0)];
        for (id, d) in [(1, 3.0), (2, 1.0), (3, 2.0)] {
            tasks.push(task(id, 0.5, d, 50.0));
        }
        let s = tiny_size(scenario(tasks, 1, 0.5, 51.0));
        let sched = schedule_stf(&s);
        let order: Vec<usize> = sched.server_timelines[0].iter().map(|e| e.task).collect();
        assert_eq!(order, vec![0, 2, 3, 1]);
    }

    #[test]
    fn stf_ties_fall_back_to_arrival() {
        let mut tasks = vec![task(0, 0.0, 1.0, 50.0)];
        tasks.push(task(1, 0.6, 1.0, 50.0));
        tasks.push(task(2, 0.2, 1.0, 50.0));
        let s = tiny_size(scenario(tasks, 1, 0.5, 51.0));
        let order: Vec<usize> = schedule_stf(&s).server_timelines[0].iter().map(|e| e.task).collect();
        assert_eq!(order, vec![0, 2, 1]);
    }

    #[test]
    fn urgent_goes_first_even_when_longest() {
        let mut tasks = vec![task(0, 0.0, 1.0, 50.0)];
        tasks.push(task(1, 0.5, 1.0, 50.0));
        let mut u = task(2, 0.6, 3.0, 50.0);
        u.urgent = true;
        tasks.push(u);
        let s = tiny_size(scenario(tasks, 1, 0.5, 51.0));
        for sched in [schedule_fcfs(&s), schedule_stf(&s)] {
            let order: Vec<usize> = sched.server_timelines[0].iter().map(|e| e.task).collect();
            assert_eq!(order, vec![0, 2, 1]);
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let tasks = (0..12)
            .map(|i| task(i, (i % 5) as f64 * 0.3, 0.7, 4.0 + i as f64 * 0.1))
            .collect();
        let s = scenario(tasks, 2, 0.25, 8.0);
        assert_eq!(schedule_fcfs(&s), schedule_fcfs(&s));
        check_schedule(&s, &schedule_fcfs(&s)).unwrap();
        check_schedule(&s, &schedule_stf(&s)).unwrap();
    }
}
