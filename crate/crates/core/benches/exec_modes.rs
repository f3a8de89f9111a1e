// Sequential vs rayon execution of the three data-parallel loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use offload_core::harness::{run_experiment_with, ExperimentPlan, SolverConfig, SolverKind};
use offload_core::meta::{run_ga_with, GaParams};
use offload_core::oracle::{enumerate_optimal_with, random_instance};
use offload_core::workload::{gen_scenario, ScenarioSettings, WorkloadConfig};
use offload_core::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn oracle(c: &mut Criterion) {
    // the largest of the first few random instances keeps the enumeration non-trivial
    let s = (0..64)
        .map(random_instance)
        .max_by_key(|s| s.num_tasks() * s.num_servers())
        .unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, s.num_tasks()), |b| {
            b.iter(|| enumerate_optimal_with(&s, exec).unwrap())
        });
    }
    g.finish();
}

fn ga(c: &mut Criterion) {
    let cfg = WorkloadConfig {
        ue_count: 100,
        tasks_per_ue: 2,
        ..Default::default()
    };
    let s = gen_scenario(&cfg, &ScenarioSettings::default()).unwrap();
    let p = GaParams {
        max_generations: 20,
        ..Default::default()
    };
    let mut g = c.benchmark_group("ga_fitness");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, s.num_tasks()), |b| {
            b.iter(|| run_ga_with(&s, &p, &mut ChaCha8Rng::seed_from_u64(1), exec))
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let mut solver_config = SolverConfig::default();
    solver_config.ga.max_generations = 20;
    solver_config.pso.max_generations = 20;
    let plan = ExperimentPlan {
        grid: [5, 10]
            .map(|ue_count| WorkloadConfig {
                ue_count,
                ..Default::default()
            })
            .to_vec(),
        solvers: vec![SolverKind::Fcfs, SolverKind::Stf, SolverKind::Ga, SolverKind::Pso],
        replications: 4,
        solver_config,
        ..Default::default()
    };
    let mut g = c.benchmark_group("experiment_grid");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| run_experiment_with(&plan, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, oracle, ga, grid);
criterion_main!(benches);
