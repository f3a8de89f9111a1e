//! Workload generation: Poisson arrivals per UE, uniform task attributes and
//! Gaussian urgency banding.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{OffloadError, Result};
use crate::model::{ensure_valid, ChannelParams, Scenario, Server, Task, REFERENCE_CPU_HZ};
use crate::seed::derive_seed;

/// UE counts of the reference experiment grid.
pub const PAPER_UE_COUNTS: [usize; 5] = [10, 50, 100, 500, 1000];
pub const PAPER_TASKS_PER_UE: [usize; 3] = [1, 2, 4];
pub const PAPER_MAX_TASKS: usize = 4000;
pub const PAPER_SERVER_COUNT: usize = 4;

/// Upper bound on slots produced by the default slot-width rule.
pub const MAX_DEFAULT_SLOTS: usize = 20_000;

/// What to do with a standard-normal urgency draw beyond three sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    #[default]
    Redraw,
    NonUrgent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadConfig {
    pub ue_count: usize,
    pub tasks_per_ue: usize,
    /// Per-UE Poisson arrival rate, tasks per second.
    pub arrival_rate: f64,
    /// Bits.
    pub size_range: [f64; 2],
    /// CPU cycles.
    pub cycle_range: [f64; 2],
    /// Seconds of slack beyond `t_c` before the deadline.
    pub deadline_slack_range: [f64; 2],
    pub tail_policy: TailPolicy,
    pub rng_seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            ue_count: 10,
            tasks_per_ue: 1,
            arrival_rate: 0.12,
            size_range: [0.4e6, 2.0e6],
            cycle_range: [0.044e9, 0.22e9],
            deadline_slack_range: [0.1, 0.4],
            tail_policy: TailPolicy::Redraw,
            rng_seed: 0,
        }
    }
}

impl WorkloadConfig {
    pub fn task_count(&self) -> usize {
        self.ue_count * self.tasks_per_ue
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(OffloadError::Config(m.to_string()));
        let range_ok = |r: &[f64; 2], strict: bool| {
            r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] && if strict { r[0] > 0.0 } else { r[0] >= 0.0 }
        };
        if self.ue_count == 0 {
            return bad("ue_count must be positive");
        }
        if self.tasks_per_ue == 0 {
            return bad("tasks_per_ue must be positive");
        }
        if !(self.arrival_rate > 0.0) || !self.arrival_rate.is_finite() {
            return bad("arrival_rate must be positive");
        }
        if !range_ok(&self.size_range, true) {
            return bad("size_range must be an ordered positive range");
        }
        if !range_ok(&self.cycle_range, true) {
            return bad("cycle_range must be an ordered positive range");
        }
        if !range_ok(&self.deadline_slack_range, true) {
            return bad("deadline_slack_range must be an ordered positive range");
        }
        Ok(())
    }

    /// Checks membership in the reference grid (UE counts, tasks per UE, task cap).
    pub fn check_paper_grid(&self) -> Result<()> {
        if !PAPER_UE_COUNTS.contains(&self.ue_count) {
            return Err(OffloadError::Config(format!(
                "ue_count {} not in {PAPER_UE_COUNTS:?}",
                self.ue_count
            )));
        }
        if !PAPER_TASKS_PER_UE.contains(&self.tasks_per_ue) {
            return Err(OffloadError::Config(format!(
                "tasks_per_ue {} not in {PAPER_TASKS_PER_UE:?}",
                self.tasks_per_ue
            )));
        }
        if self.task_count() > PAPER_MAX_TASKS {
            return Err(OffloadError::Config(format!(
                "{} tasks exceeds the cap of {PAPER_MAX_TASKS}",
                self.task_count()
            )));
        }
        Ok(())
    }
}

/// Arrival times of a Poisson process with rate `rate`, starting at zero.
pub fn gen_arrivals<R: Rng + ?Sized>(rate: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let gap = Exp::new(rate).expect("arrival rate must be positive");
    let mut t = 0.0;
    (0..count)
        .map(|_| {
            t += gap.sample(rng);
            t
        })
        .collect()
}

/// Urgency of a standard-normal draw: urgent inside the two-sided band
/// `[2, 3]` sigma, non-urgent inside `(-2, 2)`, `None` beyond three sigma.
pub fn urgency_of_draw(z: f64) -> Option<bool> {
    let a = z.abs();
    if a > 3.0 {
        None
    } else {
        Some(a >= 2.0)
    }
}

pub fn classify_urgency<R: Rng + ?Sized>(rng: &mut R, tail: TailPolicy) -> bool {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        match (urgency_of_draw(z), tail) {
            (Some(u), _) => return u,
            (None, TailPolicy::NonUrgent) => return false,
            (None, TailPolicy::Redraw) => continue,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Tasks for every UE. Each UE draws from its own stream seeded by
/// `(rng_seed, ue_id)`; tasks are then numbered in arrival order.
pub fn gen_tasks(cfg: &WorkloadConfig) -> Result<Vec<Task>> {
    cfg.validate()?;
    let mut tasks = Vec::with_capacity(cfg.task_count());
    for ue in 0..cfg.ue_count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, &[ue as u64]));
        let arrivals = gen_arrivals(cfg.arrival_rate, cfg.tasks_per_ue, &mut rng);
        for arrival in arrivals {
            let size_bits = uniform(&mut rng, cfg.size_range);
            let cycles = uniform(&mut rng, cfg.cycle_range);
            let processing_time = cycles / REFERENCE_CPU_HZ;
            let slack = uniform(&mut rng, cfg.deadline_slack_range);
            let urgent = classify_urgency(&mut rng, cfg.tail_policy);
            tasks.push(Task {
                id: 0,
                ue_id: ue,
                arrival,
                size_bits,
                cycles,
                deadline: arrival + processing_time + slack,
                processing_time,
                urgent,
            });
        }
    }
    tasks.sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.ue_id.cmp(&b.ue_id)));
    for (id, t) in tasks.iter_mut().enumerate() {
        t.id = id;
    }
    Ok(tasks)
}

/// Slot width `min t_c / 4`, widened when needed so the horizon spans at most
/// [`MAX_DEFAULT_SLOTS`] slots.
pub fn default_slot_width(tasks: &[Task]) -> f64 {
    let min_tc = tasks.iter().map(|t| t.processing_time).fold(f64::INFINITY, f64::min);
    let max_deadline = tasks.iter().map(|t| t.deadline).fold(0.0, f64::max);
    if !min_tc.is_finite() {
        return 1.0;
    }
    let fine = min_tc / 4.0;
    let coarse = max_deadline / (MAX_DEFAULT_SLOTS - 1) as f64;
    fine.max(coarse)
}

/// Horizon covering the latest deadline plus one slot, as a whole number of slots.
pub fn horizon_for(tasks: &[Task], slot_width: f64) -> f64 {
    let max_deadline = tasks.iter().map(|t| t.deadline).fold(0.0, f64::max);
    let slots = (max_deadline / slot_width - 1e-9).ceil().max(0.0) as usize + 1;
    slots as f64 * slot_width
}

/// Non-workload parts of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSettings {
    pub server_count: usize,
    pub cpu_frequency: f64,
    pub cpu_count: u32,
    pub channel: ChannelParams,
    pub channel_overrides: BTreeMap<usize, ChannelParams>,
    /// Latency weight; `None` selects [`auto_delta`].
    pub delta: Option<f64>,
    /// `None` selects [`default_slot_width`].
    pub slot_width: Option<f64>,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        ScenarioSettings {
            server_count: PAPER_SERVER_COUNT,
            cpu_frequency: REFERENCE_CPU_HZ,
            cpu_count: 1,
            channel: ChannelParams::default(),
            channel_overrides: BTreeMap::new(),
            delta: None,
            slot_width: None,
        }
    }
}

impl ScenarioSettings {
    pub fn servers(&self) -> Vec<Server> {
        (0..self.server_count)
            .map(|id| Server {
                id,
                cpu_frequency: self.cpu_frequency,
                cpu_count: self.cpu_count,
            })
            .collect()
    }
}

/// Latency weight that keeps every assigned task's weighted latency below the
/// `1/N` reward for not dropping it, so the objective first maximizes the
/// number of served tasks and then minimizes their latency.
pub fn auto_delta(s: &Scenario) -> f64 {
    let n = s.num_tasks().max(1) as f64;
    let mut worst: f64 = 0.0;
    for i in 0..s.num_tasks() {
        for j in 0..s.num_servers() {
            worst = worst.max(1.0 + s.duration(i, j) + s.comm_latency(i));
        }
    }
    if worst > 0.0 {
        1.0 / (n * worst)
    } else {
        1.0
    }
}

/// Assembles and validates a scenario from generated tasks.
pub fn assemble_scenario(tasks: Vec<Task>, settings: &ScenarioSettings, rng_seed: u64) -> Result<Scenario> {
    if let Some(d) = settings.delta {
        if !(d > 0.0) {
            return Err(OffloadError::Config(format!(
                "urgency penalty must be positive, got {d}"
            )));
        }
    }
    let slot_width = settings.slot_width.unwrap_or_else(|| default_slot_width(&tasks));
    if !(slot_width > 0.0) {
        return Err(OffloadError::Config(format!(
            "slot width must be positive, got {slot_width}"
        )));
    }
    let horizon = horizon_for(&tasks, slot_width);
    let mut s = Scenario {
        tasks,
        servers: settings.servers(),
        channel: settings.channel.clone(),
        channel_overrides: settings.channel_overrides.clone(),
        urgency_penalty: 1.0,
        slot_width,
        horizon,
        rng_seed,
    };
    s.urgency_penalty = settings.delta.unwrap_or_else(|| auto_delta(&s));
    ensure_valid(&s)?;
    Ok(s)
}

pub fn gen_scenario(cfg: &WorkloadConfig, settings: &ScenarioSettings) -> Result<Scenario> {
    assemble_scenario(gen_tasks(cfg)?, settings, cfg.rng_seed)
}
