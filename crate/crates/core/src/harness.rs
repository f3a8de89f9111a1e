//! Experiment runner: a grid of workloads times solvers times replications,
//! with CSV/JSON export.
//!
//! Every run derives its randomness from the plan's base seed and its own
//! coordinates, so output bytes depend only on the plan. Wall times are
//! written as zero unless the plan asks for timing.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{OffloadError, Result};
use crate::exec::{with_thread_cap, Exec};
use crate::greedy::{schedule_fcfs, schedule_stf};
use crate::latency::efficiency_vs;
use crate::meta::{run_ga, run_pso, ConvergenceTrace, GaParams, PsoParams};
use crate::metrics::{evaluate, MetricsReport};
use crate::milp::{branch_and_bound, build_model, solve_scenario, BnbOptions, BnbStatus};
use crate::model::{check_schedule, Scenario, Schedule};
use crate::oracle::{enumerate_optimal, random_instance};
use crate::seed::{derive_seed, name_seed};
use crate::workload::{gen_scenario, ScenarioSettings, WorkloadConfig, PAPER_TASKS_PER_UE, PAPER_UE_COUNTS};

/// Version tag written into result metadata.
pub const RESULTS_VERSION: &str = concat!("offload-results v1 (", env!("CARGO_PKG_VERSION"), ")");

pub const CSV_HEADER: &str = "grid_id,ue_count,tasks_per_ue,solver,replication,comm_latency_s,comp_latency_s,\
waiting_ratio_mean,dropped_ratio,urgent_comm_latency_s,urgent_comp_latency_s,urgent_dropped_ratio,objective,wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Fcfs,
    Stf,
    Ga,
    Pso,
    Milp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Fcfs,
        SolverKind::Stf,
        SolverKind::Ga,
        SolverKind::Pso,
        SolverKind::Milp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fcfs => "fcfs",
            SolverKind::Stf => "stf",
            SolverKind::Ga => "ga",
            SolverKind::Pso => "pso",
            SolverKind::Milp => "milp",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = OffloadError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| OffloadError::Config(format!("unknown solver `{s}` (expected fcfs, stf, ga, pso or milp)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MilpSettings {
    pub gap_tol: f64,
    /// Node limits keep results reproducible; a time limit does not.
    pub node_limit: usize,
    pub time_limit_s: Option<f64>,
    /// Grid points with more tasks are skipped for the exact solver.
    pub max_tasks: usize,
}

impl Default for MilpSettings {
    fn default() -> Self {
        MilpSettings {
            gap_tol: 1e-6,
            node_limit: 5_000,
            time_limit_s: None,
            max_tasks: 60,
        }
    }
}

impl MilpSettings {
    pub fn bnb_options(&self) -> BnbOptions {
        BnbOptions {
            gap_tol: self.gap_tol,
            node_limit: self.node_limit,
            time_limit: self.time_limit_s.map(Duration::from_secs_f64),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub ga: GaParams,
    pub pso: PsoParams,
    pub milp: MilpSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    /// Workload per grid point; its `rng_seed` is replaced per replication.
    pub grid: Vec<WorkloadConfig>,
    pub solvers: Vec<SolverKind>,
    pub replications: usize,
    pub base_seed: u64,
    pub settings: ScenarioSettings,
    pub solver_config: SolverConfig,
    /// Record measured wall times instead of zeros.
    pub timing: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            grid: paper_grid(),
            solvers: SolverKind::ALL.to_vec(),
            replications: 10,
            base_seed: 0,
            settings: ScenarioSettings::default(),
            solver_config: SolverConfig::default(),
            timing: false,
        }
    }
}

/// UE counts times tasks per UE of the reference experiments.
pub fn paper_grid() -> Vec<WorkloadConfig> {
    PAPER_UE_COUNTS
        .iter()
        .flat_map(|&ue_count| {
            PAPER_TASKS_PER_UE.iter().map(move |&tasks_per_ue| WorkloadConfig {
                ue_count,
                tasks_per_ue,
                ..Default::default()
            })
        })
        .collect()
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(OffloadError::Config("experiment grid is empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(OffloadError::Config("no solvers selected".into()));
        }
        if self.replications == 0 {
            return Err(OffloadError::Config("replications must be positive".into()));
        }
        for cfg in &self.grid {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Scenario of replication `k` at grid point `g`.
    pub fn scenario(&self, g: usize, k: usize) -> Result<Scenario> {
        let cfg = WorkloadConfig {
            rng_seed: replication_seed(self.base_seed, k),
            ..self.grid[g].clone()
        };
        gen_scenario(&cfg, &self.settings)
    }

    /// SHA-256 of the plan's JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("plans serialize");
        hex::encode(Sha256::digest(json))
    }
}

/// Workload seed of replication `k`, shared by every grid point.
pub fn replication_seed(base: u64, k: usize) -> u64 {
    derive_seed(base, &[k as u64])
}

/// Solver randomness for a scenario: independent of which other solvers run.
pub fn solver_seed(scenario_seed: u64, solver: SolverKind) -> u64 {
    derive_seed(scenario_seed, &[name_seed(solver.name())])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInfo {
    pub status: String,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub schedule: Schedule,
    pub trace: Option<ConvergenceTrace>,
    pub milp: Option<MilpInfo>,
}

/// Runs one solver on one scenario. GA and PSO draw from `seed`.
pub fn solve(s: &Scenario, solver: SolverKind, cfg: &SolverConfig, seed: u64) -> Result<SolveOutcome> {
    let plain = |schedule| SolveOutcome {
        schedule,
        trace: None,
        milp: None,
    };
    Ok(match solver {
        SolverKind::Fcfs => plain(schedule_fcfs(s)),
        SolverKind::Stf => plain(schedule_stf(s)),
        SolverKind::Ga => {
            let out = run_ga(s, &cfg.ga, &mut ChaCha8Rng::seed_from_u64(seed));
            SolveOutcome {
                schedule: out.schedule,
                trace: Some(out.trace),
                milp: None,
            }
        }
        SolverKind::Pso => {
            let out = run_pso(s, &cfg.pso, &mut ChaCha8Rng::seed_from_u64(seed));
            SolveOutcome {
                schedule: out.schedule,
                trace: Some(out.trace),
                milp: None,
            }
        }
        SolverKind::Milp => {
            let r = solve_scenario(s, &cfg.milp.bnb_options())?;
            let status = match r.status {
                BnbStatus::Optimal => "optimal",
                BnbStatus::NodeLimit => "node_limit",
                BnbStatus::TimeLimit => "time_limit",
            };
            SolveOutcome {
                schedule: r.schedule,
                trace: Some(ConvergenceTrace {
                    best: r.incumbent_trace,
                }),
                milp: Some(MilpInfo {
                    status: status.into(),
                    best_bound: r.best_bound,
                    gap: r.gap,
                    nodes: r.nodes,
                }),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub grid_id: usize,
    pub ue_count: usize,
    pub tasks_per_ue: usize,
    pub solver: SolverKind,
    pub replication: usize,
    pub scenario_seed: u64,
    pub metrics: MetricsReport,
    pub wall_time_s: f64,
    pub milp: Option<MilpInfo>,
    #[serde(skip)]
    pub trace: Option<ConvergenceTrace>,
    /// Path of the exported trace, relative to the output directory.
    pub trace_file: Option<String>,
}

impl RunRecord {
    fn csv_row(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.grid_id,
            self.ue_count,
            self.tasks_per_ue,
            self.solver,
            self.replication,
            m.all.comm_latency_s,
            m.all.comp_latency_s,
            m.all.waiting_ratio_mean,
            m.all.dropped_ratio,
            m.urgent.comm_latency_s,
            m.urgent.comp_latency_s,
            m.urgent.dropped_ratio,
            m.objective_value,
            self.wall_time_s
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub grid_id: usize,
    pub solver: SolverKind,
    pub replication: usize,
    pub reason: String,
}

/// Mean of every CSV metric over the runs of one grid point and solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub grid_id: usize,
    pub ue_count: usize,
    pub tasks_per_ue: usize,
    pub solver: SolverKind,
    pub runs: usize,
    pub comm_latency_s: f64,
    pub comp_latency_s: f64,
    pub waiting_ratio_mean: f64,
    pub dropped_ratio: f64,
    pub urgent_comm_latency_s: f64,
    pub urgent_comp_latency_s: f64,
    pub urgent_dropped_ratio: f64,
    pub objective: f64,
    pub wall_time_s: f64,
}

impl Aggregate {
    pub fn total_latency_s(&self) -> f64 {
        self.comm_latency_s + self.comp_latency_s
    }
}

/// Efficiency of a solver relative to the exact solver at one grid point;
/// `None` where the solver's own value is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub grid_id: usize,
    pub solver: SolverKind,
    pub latency: Option<f64>,
    pub dropped_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub skips: Vec<Skip>,
    pub aggregates: Vec<Aggregate>,
    pub efficiency: Vec<Efficiency>,
}

fn run_one(plan: &ExperimentPlan, g: usize, k: usize, solver: SolverKind) -> std::result::Result<RunRecord, String> {
    let cfg = &plan.grid[g];
    let n = cfg.task_count();
    if solver == SolverKind::Milp && n > plan.solver_config.milp.max_tasks {
        return Err(format!(
            "{n} tasks exceed the exact-solver cap of {}",
            plan.solver_config.milp.max_tasks
        ));
    }
    let s = plan
        .scenario(g, k)
        .map_err(|e| format!("scenario generation failed: {e}"))?;
    let started = Instant::now();
    let out = solve(&s, solver, &plan.solver_config, solver_seed(s.rng_seed, solver)).map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64();
    let metrics = evaluate(&s, &out.schedule).map_err(|e| e.to_string())?;
    Ok(RunRecord {
        grid_id: g,
        ue_count: cfg.ue_count,
        tasks_per_ue: cfg.tasks_per_ue,
        solver,
        replication: k,
        scenario_seed: s.rng_seed,
        metrics,
        wall_time_s: if plan.timing { wall } else { 0.0 },
        milp: out.milp,
        trace_file: out
            .trace
            .as_ref()
            .map(|_| format!("convergence/g{g}_{solver}_r{k}.csv")),
        trace: out.trace,
    })
}

/// Runs every (grid point, solver, replication). Failures and skipped exact
/// runs are recorded as [`Skip`]s; they never abort the grid.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    run_experiment_with(plan, Exec::default())
}

pub fn run_experiment_with(plan: &ExperimentPlan, exec: Exec) -> Result<ExperimentOutput> {
    plan.validate()?;
    let mut jobs = Vec::new();
    for g in 0..plan.grid.len() {
        for &solver in &plan.solvers {
            for k in 0..plan.replications {
                jobs.push((g, solver, k));
            }
        }
    }
    let results = with_thread_cap(|| exec.map(&jobs, |&(g, solver, k)| run_one(plan, g, k, solver)));
    let mut records = Vec::new();
    let mut skips = Vec::new();
    for (&(grid_id, solver, replication), r) in jobs.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(reason) => skips.push(Skip {
                grid_id,
                solver,
                replication,
                reason,
            }),
        }
    }
    let aggregates = aggregate(&records);
    let efficiency = efficiency_table(&aggregates);
    Ok(ExperimentOutput {
        records,
        skips,
        aggregates,
        efficiency,
    })
}

/// Per (grid point, solver) means, in grid then solver order of first appearance.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    let mut order: Vec<(usize, SolverKind)> = Vec::new();
    for r in records {
        let pos = order
            .iter()
            .position(|&o| o == (r.grid_id, r.solver))
            .unwrap_or_else(|| {
                order.push((r.grid_id, r.solver));
                order.len() - 1
            });
        groups.entry((r.grid_id, pos)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let k = rs.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / k;
            Aggregate {
                grid_id: rs[0].grid_id,
                ue_count: rs[0].ue_count,
                tasks_per_ue: rs[0].tasks_per_ue,
                solver: rs[0].solver,
                runs: rs.len(),
                comm_latency_s: mean(&|r| r.metrics.all.comm_latency_s),
                comp_latency_s: mean(&|r| r.metrics.all.comp_latency_s),
                waiting_ratio_mean: mean(&|r| r.metrics.all.waiting_ratio_mean),
                dropped_ratio: mean(&|r| r.metrics.all.dropped_ratio),
                urgent_comm_latency_s: mean(&|r| r.metrics.urgent.comm_latency_s),
                urgent_comp_latency_s: mean(&|r| r.metrics.urgent.comp_latency_s),
                urgent_dropped_ratio: mean(&|r| r.metrics.urgent.dropped_ratio),
                objective: mean(&|r| r.metrics.objective_value),
                wall_time_s: mean(&|r| r.wall_time_s),
            }
        })
        .collect()
}

/// Efficiency of every other solver against the exact solver, per grid point
/// where the exact solver has results.
pub fn efficiency_table(aggregates: &[Aggregate]) -> Vec<Efficiency> {
    let mut out = Vec::new();
    for exact in aggregates.iter().filter(|a| a.solver == SolverKind::Milp) {
        for a in aggregates
            .iter()
            .filter(|a| a.grid_id == exact.grid_id && a.solver != SolverKind::Milp)
        {
            out.push(Efficiency {
                grid_id: a.grid_id,
                solver: a.solver,
                latency: efficiency_vs(a.total_latency_s(), exact.total_latency_s()).ok(),
                dropped_ratio: efficiency_vs(a.dropped_ratio, exact.dropped_ratio).ok(),
            });
        }
    }
    out
}

pub fn results_csv(records: &[RunRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(aggregates: &[Aggregate]) -> String {
    let mut out = String::from(
        "grid_id,ue_count,tasks_per_ue,solver,runs,comm_latency_s,comp_latency_s,waiting_ratio_mean,dropped_ratio,\
urgent_comm_latency_s,urgent_comp_latency_s,urgent_dropped_ratio,objective,wall_time_s\n",
    );
    for a in aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            a.grid_id,
            a.ue_count,
            a.tasks_per_ue,
            a.solver,
            a.runs,
            a.comm_latency_s,
            a.comp_latency_s,
            a.waiting_ratio_mean,
            a.dropped_ratio,
            a.urgent_comm_latency_s,
            a.urgent_comp_latency_s,
            a.urgent_dropped_ratio,
            a.objective,
            a.wall_time_s
        );
    }
    out
}

pub fn efficiency_csv(rows: &[Efficiency]) -> String {
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
    let mut out = String::from("grid_id,solver,latency_efficiency,dropped_ratio_efficiency\n");
    for e in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.grid_id,
            e.solver,
            cell(e.latency),
            cell(e.dropped_ratio)
        );
    }
    out
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'a str,
    seed: u64,
    config_hash: String,
    averaging: &'a str,
    wall_times: &'a str,
}

#[derive(Serialize)]
struct ResultsJson<'a> {
    metadata: Metadata<'a>,
    plan: &'a ExperimentPlan,
    records: &'a [RunRecord],
    skips: &'a [Skip],
    aggregates: &'a [Aggregate],
    efficiency: &'a [Efficiency],
}

pub fn results_json(plan: &ExperimentPlan, out: &ExperimentOutput) -> String {
    let doc = ResultsJson {
        metadata: Metadata {
            version: RESULTS_VERSION,
            seed: plan.base_seed,
            config_hash: plan.config_hash(),
            averaging: "latencies are per-task means over assigned tasks; aggregates are means over replications",
            wall_times: if plan.timing { "measured" } else { "not recorded (zero)" },
        },
        plan,
        records: &out.records,
        skips: &out.skips,
        aggregates: &out.aggregates,
        efficiency: &out.efficiency,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("results serialize");
    s.push('\n');
    s
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|source| OffloadError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `results.csv`, `aggregate.csv`, `results.json`, `efficiency.csv`
/// (when the exact solver ran) and one convergence CSV per traced run.
/// Returns the written paths.
pub fn export_results(plan: &ExperimentPlan, out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    if out.records.is_empty() {
        return Err(OffloadError::Config(
            "no run produced a record; nothing to export".into(),
        ));
    }
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|source| OffloadError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    mkdir(dir)?;
    let mut written = vec![
        write(dir.join("results.csv"), &results_csv(&out.records))?,
        write(dir.join("aggregate.csv"), &aggregate_csv(&out.aggregates))?,
        write(dir.join("results.json"), &results_json(plan, out))?,
    ];
    if !out.efficiency.is_empty() {
        written.push(write(dir.join("efficiency.csv"), &efficiency_csv(&out.efficiency))?);
    }
    for r in &out.records {
        if let (Some(trace), Some(file)) = (&r.trace, &r.trace_file) {
            let path = dir.join(file);
            if let Some(parent) = path.parent() {
                mkdir(parent)?;
            }
            written.push(write(path, &trace.to_csv())?);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditMismatch {
    pub trial: usize,
    pub instance_seed: u64,
    pub oracle: f64,
    pub milp: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub trials: usize,
    pub matches: usize,
    pub mismatches: Vec<AuditMismatch>,
}

/// Tolerance on the objective when comparing the exact solver to the oracle.
pub const AUDIT_TOL: f64 = 1e-6;

/// Solves random oracle-sized instances with branch-and-bound and with the
/// exhaustive oracle and compares objectives.
pub fn oracle_audit(trials: usize, base_seed: u64, gap_tol: f64) -> AuditReport {
    let outcomes = with_thread_cap(|| {
        Exec::default().map_range(trials, |t| {
            let seed = derive_seed(base_seed, &[t as u64]);
            let s = random_instance(seed);
            let mismatch = |oracle: f64, milp: Option<f64>, detail: String| AuditMismatch {
                trial: t,
                instance_seed: seed,
                oracle,
                milp,
                detail,
            };
            let oracle = match enumerate_optimal(&s) {
                Ok(o) => o.objective,
                Err(e) => return Err(mismatch(f64::NAN, None, format!("oracle failed: {e}"))),
            };
            let model = build_model(&s).map_err(|e| mismatch(oracle, None, e.to_string()))?;
            let r = branch_and_bound(&model, gap_tol, 1_000_000).map_err(|e| mismatch(oracle, None, e.to_string()))?;
            if let Err(v) = check_schedule(&s, &r.schedule) {
                return Err(mismatch(
                    oracle,
                    Some(r.objective),
                    format!("{} checker violations", v.len()),
                ));
            }
            if (r.objective - oracle).abs() > AUDIT_TOL {
                return Err(mismatch(oracle, Some(r.objective), "objective differs".into()));
            }
            Ok(())
        })
    });
    let mismatches: Vec<_> = outcomes.into_iter().filter_map(|o| o.err()).collect();
    AuditReport {
        trials,
        matches: trials - mismatches.len(),
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> ExperimentPlan {
        ExperimentPlan {
            grid: vec![WorkloadConfig {
                ue_count: 4,
                tasks_per_ue: 1,
                arrival_rate: 2.0,
                ..Default::default()
            }],
            solvers: vec![SolverKind::Fcfs, SolverKind::Stf],
            replications: 3,
            base_seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn small_audit_matches() {
        let r = oracle_audit(5, 3, 1e-9);
        assert_eq!(r.matches, 5, "{:?}", r.mismatches);
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("simplex".parse::<SolverKind>().is_err());
    }

    #[test]
    fn counts_and_csv_shape() {
        let plan = small_plan();
        let out = run_experiment(&plan).unwrap();
        assert_eq!(out.records.len(), 6);
        assert!(out.skips.is_empty());
        let csv = results_csv(&out.records);
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert!(csv.lines().all(|l| l.split(',').count() == 14));
        assert_eq!(out.aggregates.len(), 2);
        assert!(out.efficiency.is_empty());
    }

    #[test]
    fn exact_solver_skipped_above_cap() {
        let mut plan = small_plan();
        plan.solvers = vec![SolverKind::Milp];
        plan.solver_config.milp.max_tasks = 3;
        let out = run_experiment(&plan).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.skips.len(), 3);
    }

    #[test]
    fn solver_order_is_irrelevant() {
        let mut a = small_plan();
        a.solvers = vec![SolverKind::Ga, SolverKind::Fcfs];
        a.solver_config.ga.max_generations = 5;
        let mut b = a.clone();
        b.solvers.reverse();
        let ra = run_experiment(&a).unwrap().records;
        let rb = run_experiment(&b).unwrap().records;
        for r in &ra {
            let twin = rb
                .iter()
                .find(|o| (o.solver, o.replication) == (r.solver, r.replication))
                .unwrap();
            assert_eq!(r, twin);
        }
    }
}
