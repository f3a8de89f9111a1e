use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use offload_core::harness::{
    export_results, oracle_audit, run_experiment, solve, solver_seed, ExperimentPlan, SolverKind,
};
use offload_core::metrics::{evaluate, ClassMetrics, MetricsReport};
use offload_core::milp::{build_model, to_lp_string};
use offload_core::scenario_io::{read_scenario, serialize_scenario, write_scenario};
use offload_core::workload::{auto_delta, gen_scenario, horizon_for};
use offload_core::{OffloadError, Scenario};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_URGENT_INFEASIBLE: u8 = 3;

/// Task offloading to MEC servers: workload generation, five schedulers
/// (FCFS, STF, GA, PSO, exact MILP) and an experiment harness.
#[derive(Parser)]
#[command(name = "offload", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Workload seed (generate, run, export-lp) or base seed (experiment, oracle-check).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML experiment plan; its first grid point is the workload of single runs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative optimality gap at which branch-and-bound stops.
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    /// Latency weight; defaults to the automatic choice.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Slot width in seconds.
    #[arg(long, global = true)]
    slot_width: Option<f64>,
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long)]
    ue_count: Option<usize>,
    #[arg(long)]
    tasks_per_ue: Option<usize>,
    /// Per-UE arrival rate, tasks per second.
    #[arg(long)]
    arrival_rate: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file (to <out>/scenario.txt, or stdout).
    Generate {
        #[command(flatten)]
        workload: WorkloadArgs,
    },
    /// Solve one scenario with one solver and print its metrics.
    Run {
        #[arg(long, value_parser = parse_solver)]
        solver: SolverKind,
        /// Scenario file; generated from the workload options when absent.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Print the metrics as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        workload: WorkloadArgs,
    },
    /// Run an experiment plan and export CSV/JSON results (default out: results/).
    Experiment {
        /// Comma-separated subset of fcfs, stf, ga, pso, milp.
        #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
        solvers: Option<Vec<SolverKind>>,
        #[arg(long)]
        replications: Option<usize>,
        /// Record measured wall times (results are then no longer byte-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compare branch-and-bound with exhaustive search on random small instances.
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Write the MILP model in LP format (to <out>/model.lp, or stdout).
    ExportLp {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        workload: WorkloadArgs,
    },
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: OffloadError| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl From<OffloadError> for Failure {
    fn from(e: OffloadError) -> Self {
        let code = match e {
            OffloadError::UrgentInfeasible { .. } => EXIT_URGENT_INFEASIBLE,
            OffloadError::Config(_) | OffloadError::Parse { .. } | OffloadError::InvalidScenario(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn load_plan(g: &Global) -> Result<ExperimentPlan, Failure> {
    let mut plan = match &g.config {
        None => ExperimentPlan::default(),
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
    };
    if let Some(seed) = g.seed {
        plan.base_seed = seed;
    }
    if let Some(tol) = g.gap_tol {
        if !(tol >= 0.0) {
            return Err(usage(format!("--gap-tol must be non-negative, got {tol}")));
        }
        plan.solver_config.milp.gap_tol = tol;
    }
    if g.delta.is_some() {
        plan.settings.delta = g.delta;
    }
    if g.slot_width.is_some() {
        plan.settings.slot_width = g.slot_width;
    }
    if plan.grid.is_empty() {
        return Err(usage("config has an empty grid".into()));
    }
    Ok(plan)
}

/// The scenario of a single-run command: read from a file (with the global
/// overrides applied) or generated from the plan's first grid point.
fn single_scenario(g: &Global, file: Option<&Path>, w: &WorkloadArgs) -> Result<Scenario, Failure> {
    let plan = load_plan(g)?;
    if let Some(path) = file {
        let mut s = read_scenario(path)?;
        if let Some(width) = g.slot_width {
            if !(width > 0.0) {
                return Err(usage(format!("--slot-width must be positive, got {width}")));
            }
            s.slot_width = width;
            s.horizon = horizon_for(&s.tasks, width);
        }
        match g.delta {
            Some(d) if !(d > 0.0) => return Err(usage(format!("--delta must be positive, got {d}"))),
            Some(d) => s.urgency_penalty = d,
            None if g.slot_width.is_some() => s.urgency_penalty = auto_delta(&s),
            None => {}
        }
        offload_core::model::ensure_valid(&s)?;
        return Ok(s);
    }
    let mut cfg = plan.grid[0].clone();
    if let Some(v) = w.ue_count {
        cfg.ue_count = v;
    }
    if let Some(v) = w.tasks_per_ue {
        cfg.tasks_per_ue = v;
    }
    if let Some(v) = w.arrival_rate {
        cfg.arrival_rate = v;
    }
    cfg.rng_seed = g.seed.unwrap_or(cfg.rng_seed);
    Ok(gen_scenario(&cfg, &plan.settings)?)
}

fn emit(out: Option<&Path>, file: &str, contents: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure {
                code: EXIT_FAILURE,
                message: format!("cannot create {}: {e}", dir.display()),
            })?;
            let path = dir.join(file);
            std::fs::write(&path, contents).map_err(|e| Failure {
                code: EXIT_FAILURE,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let _ = std::io::stdout().write_all(contents.as_bytes());
        }
    }
    Ok(())
}

fn format_report(s: &Scenario, solver: SolverKind, r: &MetricsReport) -> String {
    let row = |name: &str, f: fn(&ClassMetrics) -> f64| {
        format!(
            "{name:<22}{:>12.6}{:>12.6}{:>12.6}\n",
            f(&r.all),
            f(&r.urgent),
            f(&r.non_urgent)
        )
    };
    let mut out = format!(
        "solver {solver}: {} tasks ({} urgent) on {} servers\nobjective {:.9}\n",
        s.num_tasks(),
        s.urgent_count(),
        s.num_servers(),
        r.objective_value
    );
    out += &format!("{:<22}{:>12}{:>12}{:>12}\n", "", "all", "urgent", "non-urgent");
    out += &row("comm latency (s)", |c| c.comm_latency_s);
    out += &row("comp latency (s)", |c| c.comp_latency_s);
    out += &row("waiting ratio", |c| c.waiting_ratio_mean);
    out += &row("dropped ratio", |c| c.dropped_ratio);
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Generate { workload } => {
            let s = single_scenario(g, None, &workload)?;
            match &g.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Failure {
                        code: EXIT_FAILURE,
                        message: format!("cannot create {}: {e}", dir.display()),
                    })?;
                    let path = dir.join("scenario.txt");
                    write_scenario(&path, &s)?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", serialize_scenario(&s)),
            }
        }
        Command::Run {
            solver,
            scenario,
            json,
            workload,
        } => {
            let s = single_scenario(g, scenario.as_deref(), &workload)?;
            let plan = load_plan(g)?;
            let outcome = solve(&s, solver, &plan.solver_config, solver_seed(s.rng_seed, solver))?;
            if matches!(solver, SolverKind::Ga | SolverKind::Pso | SolverKind::Milp) {
                if let Some(i) = (0..s.num_tasks()).find(|&i| s.tasks[i].urgent && !outcome.schedule.is_assigned(i)) {
                    return Err(OffloadError::UrgentInfeasible { task: Some(i) }.into());
                }
            }
            let report = evaluate(&s, &outcome.schedule)?;
            let text = if json {
                serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
            } else {
                format_report(&s, solver, &report)
            };
            print!("{text}");
            if let Some(dir) = &g.out {
                let json = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
                emit(Some(dir), "report.json", &json)?;
            }
        }
        Command::Experiment {
            solvers,
            replications,
            timing,
        } => {
            let mut plan = load_plan(g)?;
            if let Some(s) = solvers {
                plan.solvers = s;
            }
            if let Some(r) = replications {
                plan.replications = r;
            }
            plan.timing |= timing;
            let out = run_experiment(&plan)?;
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let written = export_results(&plan, &out, &dir)?;
            for skip in &out.skips {
                eprintln!(
                    "skipped grid {} {} r{}: {}",
                    skip.grid_id, skip.solver, skip.replication, skip.reason
                );
            }
            println!(
                "{} runs, {} skipped; {} files written to {}",
                out.records.len(),
                out.skips.len(),
                written.len(),
                dir.display()
            );
        }
        Command::OracleCheck { trials } => {
            let seed = g.seed.unwrap_or(0);
            let report = oracle_audit(trials, seed, g.gap_tol.unwrap_or(1e-9));
            for m in &report.mismatches {
                eprintln!(
                    "trial {} (instance seed {}): oracle {} exact {:?}: {}",
                    m.trial, m.instance_seed, m.oracle, m.milp, m.detail
                );
            }
            println!("{}/{} match", report.matches, report.trials);
            if !report.mismatches.is_empty() {
                return Err(Failure {
                    code: EXIT_FAILURE,
                    message: format!("{} mismatches", report.mismatches.len()),
                });
            }
        }
        Command::ExportLp { scenario, workload } => {
            let s = single_scenario(g, scenario.as_deref(), &workload)?;
            let model = build_model(&s)?;
            emit(g.out.as_deref(), "model.lp", &to_lp_string(&model))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
