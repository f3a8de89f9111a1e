//! Exact solver: linearized MILP, an in-crate simplex and branch-and-bound.

pub mod bnb;
pub mod lp_format;
pub mod model;
pub mod simplex;

pub use bnb::{branch_and_bound, branch_and_bound_with, BnbOptions, BnbResult, BnbStatus};
pub use lp_format::to_lp_string;
pub use model::{build_model, build_model_with, extract_schedule, BuildOptions, MilpModel};

use crate::error::Result;
use crate::greedy::{schedule_fcfs, schedule_stf};
use crate::model::Scenario;

/// Builds and solves a scenario, seeding the search with both greedy schedules.
pub fn solve_scenario(s: &Scenario, opts: &BnbOptions) -> Result<BnbResult> {
    let model = build_model(s)?;
    branch_and_bound_with(&model, opts, &[schedule_fcfs(s), schedule_stf(s)])
}
