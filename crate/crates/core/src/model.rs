//! Domain types shared by every solver: tasks, servers, channels, the
//! scenario they form, and the schedule a solver returns.
//!
//! Time is continuous, but server capacity is reserved on a uniform slot
//! grid. A task started in slot `k` starts at `max(t_a, k * dt)` and holds
//! its server from slot `k` through the slot that contains its finish time.
//! Every solver in the crate (greedy, GA/PSO decode, MILP, oracle) places
//! work through [`Scenario::placement`], so their feasible sets coincide.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OffloadError, Result};

/// CPU frequency (Hz) that defines a task's server-independent processing time.
pub const REFERENCE_CPU_HZ: f64 = 2.2e9;

/// Penalty added to heuristic fitness for every dropped urgent task.
pub const URGENT_DROP_PENALTY: f64 = 1e6;

/// Absolute tolerance for time comparisons on the slot grid.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub ue_id: usize,
    /// Arrival time `t_a` in seconds.
    pub arrival: f64,
    /// Payload size `S` in bits.
    pub size_bits: f64,
    /// CPU cycles `C` required.
    pub cycles: f64,
    /// Absolute deadline `t_d` in seconds.
    pub deadline: f64,
    /// Processing time `t_c` in seconds, `C / REFERENCE_CPU_HZ` for generated tasks.
    pub processing_time: f64,
    pub urgent: bool,
}

impl Task {
    /// `t_d - t_a - t_c`, the denominator of the waiting ratio.
    pub fn slack(&self) -> f64 {
        self.deadline - self.arrival - self.processing_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub id: usize,
    /// Cycles per second.
    pub cpu_frequency: f64,
    pub cpu_count: u32,
}

impl Server {
    pub fn new(id: usize, cpu_frequency: f64) -> Self {
        Server {
            id,
            cpu_frequency,
            cpu_count: 1,
        }
    }
}

/// Execution time `C_i / f_j` of a task on a server.
pub fn effective_duration(task: &Task, server: &Server) -> f64 {
    task.cycles / server.cpu_frequency
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Uplink bandwidth `B` in Hz.
    pub bandwidth: f64,
    /// Transmit power `p` in watts.
    pub tx_power: f64,
    pub channel_gain: f64,
    /// Noise power `N0` in watts.
    pub noise_power_density: f64,
    pub bandwidth_cap: f64,
}

impl ChannelParams {
    /// Signal-to-noise ratio used by the default channel. Stored as a ratio so the
    /// capacity formula stays well defined; the bandwidth is then solved so that
    /// the uplink rate is exactly [`DEFAULT_RATE_BPS`].
    pub const DEFAULT_SNR: f64 = 15.0;
    /// 200 mW.
    pub const DEFAULT_TX_POWER: f64 = 0.2;
    pub const DEFAULT_RATE_BPS: f64 = 50e6;

    /// Channel with the given SNR whose bandwidth is chosen to deliver `rate_bps`.
    pub fn for_rate(rate_bps: f64, snr: f64) -> Self {
        let bandwidth = rate_bps / (1.0 + snr).log2();
        ChannelParams {
            bandwidth,
            tx_power: Self::DEFAULT_TX_POWER,
            channel_gain: 1.0,
            noise_power_density: Self::DEFAULT_TX_POWER / snr,
            bandwidth_cap: bandwidth.max(20e6),
        }
    }

    pub fn snr(&self) -> f64 {
        self.tx_power * self.channel_gain / self.noise_power_density
    }
}

impl Default for ChannelParams {
    // Raw settings behind this default: 50 Mbps data rate, 200 mW transmit
    // power, noise power listed as "100 dBm" (sign ambiguous, not used).
    fn default() -> Self {
        ChannelParams::for_rate(Self::DEFAULT_RATE_BPS, Self::DEFAULT_SNR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tasks: Vec<Task>,
    pub servers: Vec<Server>,
    pub channel: ChannelParams,
    /// Per-UE channel overrides, keyed by `ue_id`.
    #[serde(default)]
    pub channel_overrides: BTreeMap<usize, ChannelParams>,
    /// Latency weight `delta`.
    pub urgency_penalty: f64,
    pub slot_width: f64,
    pub horizon: f64,
    pub rng_seed: u64,
}

/// Where and when a task runs if started in a given slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub start: f64,
    pub finish: f64,
    pub first_slot: usize,
    /// Exclusive.
    pub end_slot: usize,
}

impl Placement {
    pub fn slots(&self) -> std::ops::Range<usize> {
        self.first_slot..self.end_slot
    }
}

impl Scenario {
    pub fn channel_for(&self, ue_id: usize) -> &ChannelParams {
        self.channel_overrides.get(&ue_id).unwrap_or(&self.channel)
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_servers(&self) -> usize {
        self.servers.len()
    }

    /// Roundtrip communication latency `T^t` of task `i`.
    pub fn comm_latency(&self, i: usize) -> f64 {
        let task = &self.tasks[i];
        let rate = crate::latency::uplink_rate(self.channel_for(task.ue_id));
        2.0 * task.size_bits / rate
    }

    /// Latest admissible start `t_d - t_c - T^t`.
    pub fn latest_start(&self, i: usize) -> f64 {
        let task = &self.tasks[i];
        task.deadline - task.processing_time - self.comm_latency(i)
    }

    pub fn duration(&self, i: usize, j: usize) -> f64 {
        effective_duration(&self.tasks[i], &self.servers[j])
    }

    pub fn slot_count(&self) -> usize {
        (self.horizon / self.slot_width).round() as usize
    }

    pub fn slot_of(&self, t: f64) -> usize {
        (t / self.slot_width + TIME_EPS).floor().max(0.0) as usize
    }

    /// Placement of task `i` on server `j` starting in slot `k`, or `None` when
    /// that slot precedes the arrival, misses the start window, or runs past
    /// the horizon.
    pub fn placement(&self, i: usize, j: usize, k: usize) -> Option<Placement> {
        let task = &self.tasks[i];
        if k < self.slot_of(task.arrival) {
            return None;
        }
        let start = task.arrival.max(k as f64 * self.slot_width);
        if start > self.latest_start(i) + TIME_EPS {
            return None;
        }
        let finish = start + self.duration(i, j);
        let end_slot = ((finish / self.slot_width) - TIME_EPS).ceil().max(k as f64 + 1.0) as usize;
        if end_slot > self.slot_count() {
            return None;
        }
        Some(Placement {
            start,
            finish,
            first_slot: k,
            end_slot,
        })
    }

    /// All feasible placements of task `i` on server `j`, ordered by start slot.
    pub fn placements(&self, i: usize, j: usize) -> Vec<Placement> {
        let first = self.slot_of(self.tasks[i].arrival);
        // start and end slot both grow with k, so the first miss ends the run
        (first..self.slot_count())
            .map_while(|k| self.placement(i, j, k))
            .collect()
    }

    /// Index of the task whose start is pinned to its arrival: earliest arrival,
    /// lowest id on ties.
    pub fn first_task(&self) -> Option<usize> {
        (0..self.tasks.len()).min_by(|&a, &b| {
            let (ta, tb) = (&self.tasks[a], &self.tasks[b]);
            ta.arrival.total_cmp(&tb.arrival).then(ta.id.cmp(&tb.id))
        })
    }

    pub fn urgent_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.urgent).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Task(usize),
    Server(usize),
    Channel(Option<usize>),
    Scenario,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Task(id) => write!(f, "task {id}"),
            Subject::Server(id) => write!(f, "server {id}"),
            Subject::Channel(None) => write!(f, "default channel"),
            Subject::Channel(Some(ue)) => write!(f, "channel of ue {ue}"),
            Subject::Scenario => write!(f, "scenario"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    NonFinite(&'static str),
    NegativeArrival,
    ArrivalOutsideHorizon,
    NonPositiveSize,
    NonPositiveCycles,
    NonPositiveProcessingTime,
    DeadlineNotAfterArrival,
    DegenerateSlack(f64),
    DuplicateId,
    NonPositiveFrequency,
    ZeroCpuCount,
    NonPositiveBandwidth,
    BandwidthAboveCap { bandwidth: f64, cap: f64 },
    NonPositiveTxPower,
    NonPositiveGain,
    NonPositiveNoise,
    NonPositivePenalty,
    NonPositiveSlotWidth,
    HorizonNotSlotMultiple,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::NonFinite(field) => write!(f, "{field} is not finite"),
            Rule::NegativeArrival => write!(f, "arrival time is negative"),
            Rule::ArrivalOutsideHorizon => write!(f, "arrival time is not inside [0, horizon)"),
            Rule::NonPositiveSize => write!(f, "size must be positive"),
            Rule::NonPositiveCycles => write!(f, "cycle demand must be positive"),
            Rule::NonPositiveProcessingTime => write!(f, "processing time must be positive"),
            Rule::DeadlineNotAfterArrival => write!(f, "deadline is not after arrival"),
            Rule::DegenerateSlack(s) => write!(f, "degenerate slack (t_d - t_a - t_c = {s})"),
            Rule::DuplicateId => write!(f, "duplicate id"),
            Rule::NonPositiveFrequency => write!(f, "cpu frequency must be positive"),
            Rule::ZeroCpuCount => write!(f, "cpu count must be at least 1"),
            Rule::NonPositiveBandwidth => write!(f, "bandwidth must be positive"),
            Rule::BandwidthAboveCap { bandwidth, cap } => {
                write!(f, "bandwidth {bandwidth} exceeds bandwidth cap {cap}")
            }
            Rule::NonPositiveTxPower => write!(f, "transmit power must be positive"),
            Rule::NonPositiveGain => write!(f, "channel gain must be positive"),
            Rule::NonPositiveNoise => write!(f, "noise power must be positive"),
            Rule::NonPositivePenalty => write!(f, "urgency penalty must be positive"),
            Rule::NonPositiveSlotWidth => write!(f, "slot width must be positive"),
            Rule::HorizonNotSlotMultiple => {
                write!(f, "horizon is not a positive integer number of slots")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

/// Checks every task, server, channel and scenario-level invariant. An empty
/// vector means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject, rule| out.push(Violation { subject, rule });

    if !(s.urgency_penalty > 0.0) || !s.urgency_penalty.is_finite() {
        push(Subject::Scenario, Rule::NonPositivePenalty);
    }
    let grid_ok = s.slot_width > 0.0 && s.slot_width.is_finite();
    if !grid_ok {
        push(Subject::Scenario, Rule::NonPositiveSlotWidth);
    } else {
        let slots = s.horizon / s.slot_width;
        if !(slots >= 1.0 - 1e-9) || (slots - slots.round()).abs() > 1e-6 {
            push(Subject::Scenario, Rule::HorizonNotSlotMultiple);
        }
    }

    let mut channels: Vec<(Option<usize>, &ChannelParams)> = vec![(None, &s.channel)];
    channels.extend(s.channel_overrides.iter().map(|(ue, c)| (Some(*ue), c)));
    for (ue, ch) in channels {
        let subject = Subject::Channel(ue);
        if !(ch.bandwidth > 0.0) {
            push(subject, Rule::NonPositiveBandwidth);
        }
        if ch.bandwidth > ch.bandwidth_cap {
            push(
                subject,
                Rule::BandwidthAboveCap {
                    bandwidth: ch.bandwidth,
                    cap: ch.bandwidth_cap,
                },
            );
        }
        if !(ch.tx_power > 0.0) {
            push(subject, Rule::NonPositiveTxPower);
        }
        if !(ch.channel_gain > 0.0) {
            push(subject, Rule::NonPositiveGain);
        }
        if !(ch.noise_power_density > 0.0) {
            push(subject, Rule::NonPositiveNoise);
        }
    }

    let mut ids = BTreeSet::new();
    for srv in &s.servers {
        let subject = Subject::Server(srv.id);
        if !ids.insert(srv.id) {
            push(subject, Rule::DuplicateId);
        }
        if !(srv.cpu_frequency > 0.0) || !srv.cpu_frequency.is_finite() {
            push(subject, Rule::NonPositiveFrequency);
        }
        if srv.cpu_count == 0 {
            push(subject, Rule::ZeroCpuCount);
        }
    }

    let mut ids = BTreeSet::new();
    for t in &s.tasks {
        let subject = Subject::Task(t.id);
        if !ids.insert(t.id) {
            push(subject, Rule::DuplicateId);
        }
        for (name, v) in [
            ("arrival", t.arrival),
            ("size", t.size_bits),
            ("cycles", t.cycles),
            ("deadline", t.deadline),
            ("processing time", t.processing_time),
        ] {
            if !v.is_finite() {
                push(subject, Rule::NonFinite(name));
            }
        }
        if t.arrival < 0.0 {
            push(subject, Rule::NegativeArrival);
        } else if t.arrival >= s.horizon {
            push(subject, Rule::ArrivalOutsideHorizon);
        }
        if !(t.size_bits > 0.0) {
            push(subject, Rule::NonPositiveSize);
        }
        if !(t.cycles > 0.0) {
            push(subject, Rule::NonPositiveCycles);
        }
        if !(t.processing_time > 0.0) {
            push(subject, Rule::NonPositiveProcessingTime);
        }
        if !(t.deadline > t.arrival) {
            push(subject, Rule::DeadlineNotAfterArrival);
        }
        if !(t.slack() > 0.0) {
            push(subject, Rule::DegenerateSlack(t.slack()));
        }
    }
    out
}

/// `Ok(())` iff [`validate_scenario`] finds nothing.
pub fn ensure_valid(s: &Scenario) -> Result<()> {
    let v = validate_scenario(s);
    if v.is_empty() {
        Ok(())
    } else {
        Err(OffloadError::InvalidScenario(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub task: usize,
    pub start: f64,
    pub finish: f64,
}

/// Solver output. Task and server references are positions in
/// `Scenario::tasks` / `Scenario::servers`; `None` marks a dropped task.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub assignment: Vec<Option<usize>>,
    pub start_times: Vec<Option<f64>>,
    /// Per server, entries ordered by start time.
    pub server_timelines: Vec<Vec<TimelineEntry>>,
}

impl Schedule {
    /// Everything dropped.
    pub fn empty(s: &Scenario) -> Self {
        Schedule {
            assignment: vec![None; s.num_tasks()],
            start_times: vec![None; s.num_tasks()],
            server_timelines: vec![Vec::new(); s.num_servers()],
        }
    }

    /// Builds a schedule from per-task `(server, start)` decisions.
    pub fn from_decisions(s: &Scenario, decisions: &[Option<(usize, f64)>]) -> Self {
        let mut sched = Schedule::empty(s);
        for (i, d) in decisions.iter().enumerate() {
            if let Some((j, start)) = *d {
                sched.assignment[i] = Some(j);
                sched.start_times[i] = Some(start);
                sched.server_timelines[j].push(TimelineEntry {
                    task: i,
                    start,
                    finish: start + s.duration(i, j),
                });
            }
        }
        for tl in &mut sched.server_timelines {
            tl.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.task.cmp(&b.task)));
        }
        sched
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn is_assigned(&self, i: usize) -> bool {
        self.assignment.get(i).is_some_and(|a| a.is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    ShapeMismatch,
    UnknownServer {
        task: usize,
        server: usize,
    },
    MissingStart {
        task: usize,
    },
    StartOnDroppedTask {
        task: usize,
    },
    OutsideWindow {
        task: usize,
        start: f64,
        earliest: f64,
        latest: f64,
    },
    OffGrid {
        task: usize,
        start: f64,
    },
    PastHorizon {
        task: usize,
    },
    CapacityExceeded {
        server: usize,
        slot: usize,
    },
    TimelineMismatch {
        server: usize,
    },
    UrgentDropped {
        task: usize,
    },
    FirstTaskDelayed {
        task: usize,
        start: f64,
    },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            ShapeMismatch => write!(f, "schedule does not match scenario dimensions"),
            UnknownServer { task, server } => write!(f, "task {task} mapped to unknown server {server}"),
            MissingStart { task } => write!(f, "assigned task {task} has no start time"),
            StartOnDroppedTask { task } => write!(f, "dropped task {task} has a start time"),
            OutsideWindow {
                task,
                start,
                earliest,
                latest,
            } => write!(f, "task {task} starts at {start}, outside [{earliest}, {latest}]"),
            OffGrid { task, start } => write!(
                f,
                "task {task} start {start} is neither its arrival nor a slot boundary"
            ),
            PastHorizon { task } => write!(f, "task {task} runs past the horizon"),
            CapacityExceeded { server, slot } => write!(f, "server {server} over capacity in slot {slot}"),
            TimelineMismatch { server } => write!(f, "timeline of server {server} disagrees with assignment"),
            UrgentDropped { task } => write!(f, "urgent task {task} dropped"),
            FirstTaskDelayed { task, start } => write!(f, "first task {task} starts at {start}, not at arrival"),
        }
    }
}

/// Single feasibility checker for every solver's output.
pub fn check_schedule(s: &Scenario, sched: &Schedule) -> std::result::Result<(), Vec<ScheduleViolation>> {
    use ScheduleViolation::*;
    let n = s.num_tasks();
    let m = s.num_servers();
    if sched.assignment.len() != n || sched.start_times.len() != n || sched.server_timelines.len() != m {
        return Err(vec![ShapeMismatch]);
    }
    let mut out = Vec::new();
    let mut usage = vec![vec![0u32; s.slot_count()]; m];
    let mut expected: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];

    for i in 0..n {
        let task = &s.tasks[i];
        match (sched.assignment[i], sched.start_times[i]) {
            (None, None) => {
                if task.urgent {
                    out.push(UrgentDropped { task: i });
                }
            }
            (None, Some(_)) => out.push(StartOnDroppedTask { task: i }),
            (Some(_), None) => out.push(MissingStart { task: i }),
            (Some(j), Some(start)) => {
                if j >= m {
                    out.push(UnknownServer { task: i, server: j });
                    continue;
                }
                expected[j].push((i, start));
                let latest = s.latest_start(i);
                if start < task.arrival - TIME_EPS || start > latest + TIME_EPS {
                    out.push(OutsideWindow {
                        task: i,
                        start,
                        earliest: task.arrival,
                        latest,
                    });
                    continue;
                }
                let k = s.slot_of(start);
                match s.placement(i, j, k) {
                    Some(p) if (p.start - start).abs() <= TIME_EPS => {
                        for slot in p.slots() {
                            usage[j][slot] += 1;
                        }
                    }
                    Some(_) => out.push(OffGrid { task: i, start }),
                    None => out.push(PastHorizon { task: i }),
                }
            }
        }
    }

    for (j, srv) in s.servers.iter().enumerate() {
        for (slot, &u) in usage[j].iter().enumerate() {
            if u > srv.cpu_count {
                out.push(CapacityExceeded { server: j, slot });
            }
        }
        let mut listed: Vec<(usize, f64)> = sched.server_timelines[j].iter().map(|e| (e.task, e.start)).collect();
        let mut exp = expected[j].clone();
        listed.sort_by_key(|e| e.0);
        exp.sort_by_key(|e| e.0);
        let ordered = sched.server_timelines[j].windows(2).all(|w| w[0].start <= w[1].start);
        if listed != exp || !ordered {
            out.push(TimelineMismatch { server: j });
        }
    }

    if let Some(first) = s.first_task() {
        if let Some(start) = sched.start_times[first] {
            if (start - s.tasks[first].arrival).abs() > TIME_EPS {
                out.push(FirstTaskDelayed { task: first, start });
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn task(id: usize, arrival: f64, t_c: f64, deadline: f64) -> Task {
        Task {
            id,
            ue_id: id,
            arrival,
            size_bits: 1e3,
            cycles: t_c * REFERENCE_CPU_HZ,
            deadline,
            processing_time: t_c,
            urgent: false,
        }
    }

    pub fn scenario(tasks: Vec<Task>, servers: usize, slot_width: f64, horizon: f64) -> Scenario {
        Scenario {
            tasks,
            servers: (0..servers).map(|j| Server::new(j, REFERENCE_CPU_HZ)).collect(),
            channel: ChannelParams::default(),
            channel_overrides: BTreeMap::new(),
            urgency_penalty: 1.0,
            slot_width,
            horizon,
            rng_seed: 0,
        }
    }

    #[test]
    fn effective_duration_is_cycles_over_frequency() {
        let mut t = task(0, 0.0, 1.0, 5.0);
        let srv = Server::new(0, 2.2e9);
        t.cycles = 2.2e9;
        assert_eq!(effective_duration(&t, &srv), 1.0);
        t.cycles = 4.4e9;
        assert_eq!(effective_duration(&t, &srv), 2.0);
        t.cycles = 1.0;
        assert_eq!(effective_duration(&t, &Server::new(0, 1.0)), 1.0);
    }

    #[test]
    fn empty_scenario_is_valid() {
        assert!(validate_scenario(&scenario(vec![], 4, 1.0, 1.0)).is_empty());
    }

    #[test]
    fn zero_slack_is_rejected() {
        let s = scenario(vec![task(0, 0.0, 2.0, 2.0)], 1, 1.0, 4.0);
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| matches!(v.rule, Rule::DegenerateSlack(_))), "{v:?}");
    }

    #[test]
    fn bandwidth_above_cap_is_rejected() {
        let mut s = scenario(vec![], 1, 1.0, 1.0);
        s.channel.bandwidth = s.channel.bandwidth_cap * 2.0;
        let v = validate_scenario(&s);
        assert!(matches!(v[0].rule, Rule::BandwidthAboveCap { .. }));
        assert_eq!(v[0].subject, Subject::Channel(None));
    }

    #[test]
    fn horizon_must_be_slot_multiple() {
        let s = scenario(vec![], 1, 0.3, 1.0);
        assert!(validate_scenario(&s)
            .iter()
            .any(|v| v.rule == Rule::HorizonNotSlotMultiple));
    }

    #[test]
    fn duplicate_ids_flagged() {
        let s = scenario(vec![task(1, 0.0, 1.0, 5.0), task(1, 0.5, 1.0, 5.0)], 1, 1.0, 8.0);
        assert!(validate_scenario(&s).iter().any(|v| v.rule == Rule::DuplicateId));
    }

    #[test]
    fn placement_snaps_to_slots() {
        let s = scenario(vec![task(0, 0.3, 1.0, 6.0)], 1, 0.5, 8.0);
        let p = s.placement(0, 0, 0).unwrap();
        assert_eq!(p.start, 0.3);
        // runs 0.3..1.3, touching slots 0, 1, 2
        assert_eq!((p.first_slot, p.end_slot), (0, 3));
        let p = s.placement(0, 0, 2).unwrap();
        assert_eq!(p.start, 1.0);
        assert_eq!(p.end_slot, 4);
        assert!(s.placement(0, 0, 12).is_none());
    }

    #[test]
    fn placements_stop_at_latest_start() {
        let s = scenario(vec![task(0, 0.0, 1.0, 3.0)], 1, 0.5, 4.0);
        let latest = s.latest_start(0);
        let ps = s.placements(0, 0);
        assert!(ps.iter().all(|p| p.start <= latest + TIME_EPS));
        assert_eq!(ps.len(), (latest / 0.5).floor() as usize + 1);
    }

    #[test]
    fn checker_flags_overlap_and_urgent_drop() {
        let mut tasks = vec![task(0, 0.0, 1.0, 5.0), task(1, 0.0, 1.0, 5.0), task(2, 0.0, 1.0, 5.0)];
        tasks[2].urgent = true;
        let s = scenario(tasks, 1, 0.5, 6.0);
        let sched = Schedule::from_decisions(&s, &[Some((0, 0.0)), Some((0, 0.5)), None]);
        let errs = check_schedule(&s, &sched).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ScheduleViolation::CapacityExceeded { .. })));
        assert!(errs
            .iter()
            .any(|e| matches!(e, ScheduleViolation::UrgentDropped { task: 2 })));
        let ok = Schedule::from_decisions(&s, &[Some((0, 0.0)), Some((0, 1.0)), Some((0, 2.0))]);
        assert_eq!(check_schedule(&s, &ok), Ok(()));
    }

    #[test]
    fn checker_enforces_first_task_start() {
        let s = scenario(vec![task(0, 0.2, 1.0, 5.0)], 1, 0.5, 6.0);
        let late = Schedule::from_decisions(&s, &[Some((0, 0.5))]);
        assert!(matches!(
            check_schedule(&s, &late).unwrap_err()[0],
            ScheduleViolation::FirstTaskDelayed { .. }
        ));
    }
}
