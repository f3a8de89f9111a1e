use offload_core::greedy::schedule_fcfs;
use offload_core::milp::simplex::{solve, LpStatus, SimplexOptions};
use offload_core::milp::{branch_and_bound, build_model, extract_schedule, to_lp_string, BnbOptions, BnbStatus};
use offload_core::model::check_schedule;
use offload_core::oracle::{enumerate_optimal, random_instance};
use offload_core::seed::derive_seed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relaxation_bounds_the_optimum(seed in any::<u64>()) {
        let s = random_instance(seed);
        let model = build_model(&s).unwrap();
        let lp = solve(&model.relaxation(&model.default_bounds()), SimplexOptions::default()).unwrap();
        prop_assert_eq!(lp.status, LpStatus::Optimal);
        let root = lp.objective + model.objective_constant;
        let best = enumerate_optimal(&s).unwrap().objective;
        prop_assert!(root <= best + 1e-7, "root {} optimum {}", root, best);

        let r = branch_and_bound(&model, 1e-9, 1_000_000).unwrap();
        prop_assert_eq!(r.status, BnbStatus::Optimal);
        // the first recorded bound is the root of the search, never weaker than the plain relaxation
        prop_assert!(r.bound_trace[0] >= root - 1e-7);
        prop_assert!(r.best_bound <= r.objective + 1e-9);
        prop_assert!((r.objective - best).abs() <= 1e-6);
    }

    #[test]
    fn schedules_lift_to_feasible_model_points(seed in any::<u64>()) {
        let s = random_instance(seed);
        let model = build_model(&s).unwrap();
        let sched = schedule_fcfs(&s);
        if check_schedule(&s, &sched).is_ok() {
            let x = model.solution_from_schedule(&sched).unwrap();
            prop_assert!(model.max_violation(&x) <= 1e-7);
            prop_assert_eq!(model.max_fractionality(&x), 0.0);
            prop_assert_eq!(&extract_schedule(&model, &x).unwrap().assignment, &sched.assignment);
            let value = offload_core::latency::objective_value(&sched, &s).unwrap();
            prop_assert!((model.objective_at(&x) - value).abs() <= 1e-9);
        }
    }
}

#[test]
fn node_limit_keeps_a_feasible_incumbent() {
    let s = (0..200)
        .map(|k| random_instance(derive_seed(77, &[k])))
        .max_by_key(|s| s.num_tasks() * s.num_servers())
        .unwrap();
    let model = build_model(&s).unwrap();
    let opts = BnbOptions {
        node_limit: 1,
        dive_interval: 0,
        ..Default::default()
    };
    let r = offload_core::milp::branch_and_bound_with(&model, &opts, &[schedule_fcfs(&s)]).unwrap();
    assert!(check_schedule(&s, &r.schedule).is_ok());
    assert!(r.nodes <= 1);
    assert!(r.best_bound <= r.objective + 1e-9);
}

#[test]
fn lp_export_names_every_variable() {
    let s = random_instance(3);
    let model = build_model(&s).unwrap();
    let text = to_lp_string(&model);
    for v in &model.variables {
        assert!(text.contains(&v.name), "{} missing", v.name);
    }
    assert!(text.contains("Binaries"));
}
