//! Task offloading to MEC servers: system model, latency formulas, workload
//! generation, greedy baselines, an exact MILP solver, metaheuristics, a
//! brute-force oracle and an experiment harness.

pub mod error;
pub mod exec;
pub mod greedy;
pub mod harness;
pub mod latency;
pub mod meta;
pub mod metrics;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod scenario_io;
pub mod seed;
pub mod timeline;
pub mod workload;

pub use error::{OffloadError, Result};
pub use exec::Exec;
pub use model::{Scenario, Schedule, Server, Task};
