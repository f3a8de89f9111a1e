use std::path::PathBuf;

use thiserror::Error;

use crate::milp::simplex::LpError;
use crate::model::{ScheduleViolation, Violation};

#[derive(Debug, Error)]
pub enum OffloadError {
    #[error("invalid scenario: {}", join(.0))]
    InvalidScenario(Vec<Violation>),

    #[error("infeasible schedule: {}", join(.0))]
    InfeasibleSchedule(Vec<ScheduleViolation>),

    #[error("task {task}: deadline leaves no slack (t_d - t_a - t_c = {slack})")]
    DegenerateSlack { task: usize, slack: f64 },

    #[error("start time {start} precedes arrival {arrival} of task {task}")]
    StartBeforeArrival { task: usize, start: f64, arrival: f64 },

    #[error("uplink rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model too large: {variables} variables exceeds cap {cap}")]
    ModelTooLarge { variables: usize, cap: usize },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("urgent task {} cannot be scheduled", .task.map(|t| t.to_string()).unwrap_or_else(|| "set".into()))]
    UrgentInfeasible { task: Option<usize> },

    #[error("search stopped before finding a feasible schedule")]
    NoIncumbent,

    #[error("solution is fractional: {variable} = {value}")]
    Fractional { variable: String, value: f64 },

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, OffloadError>;

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
