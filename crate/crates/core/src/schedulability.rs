//! Instantaneous schedulability: `r_i <= d_i` checked at the left limit of
//! every significant moment of a trace.

use serde::Serialize;

use crate::engine::{TimingState, Trace};
use crate::rat::Rat;

pub fn instantaneous_check(state_left: &TimingState) -> Vec<bool> {
    state_left.r.iter().zip(&state_left.d).map(|(r, d)| r <= d).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub moment: Rat,
    pub d_left: Rat,
    pub r_left: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskVerdict {
    pub task: String,
    pub schedulable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub window: [Rat; 2],
    pub tasks: Vec<TaskVerdict>,
}

impl Verdict {
    pub fn all_schedulable(&self) -> bool {
        self.tasks.iter().all(|t| t.schedulable)
    }

    /// Indices of tasks with at least one violation.
    pub fn violating(&self) -> Vec<usize> {
        self.tasks.iter().enumerate().filter(|(_, t)| !t.schedulable).map(|(i, _)| i).collect()
    }
}

/// Per-task verdict over the trace window; the window end counts as a
/// significant moment.
pub fn window_schedulable(trace: &Trace) -> Verdict {
    let mut first: Vec<Option<Violation>> = vec![None; trace.taskset.len()];
    for m in &trace.moments {
        for (i, ok) in instantaneous_check(&m.left).into_iter().enumerate() {
            if !ok && first[i].is_none() {
                first[i] = Some(Violation { moment: m.time, d_left: m.left.d[i], r_left: m.left.r[i] });
            }
        }
    }
    let tasks = trace
        .taskset
        .tasks()
        .iter()
        .zip(first)
        .map(|(t, v)| TaskVerdict { task: t.name.clone(), schedulable: v.is_none(), first_violation: v })
        .collect();
    Verdict { window: [trace.start, trace.end], tasks }
}
