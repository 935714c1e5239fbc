//! Worst-case moments and infinite-horizon tests for RMS task sets.
//!
//! For two tasks the maximal interfering occupancy and every deadline value
//! that attains it are given in closed form. For `N` tasks the synchronous
//! release is a worst case, so the test simulates one period of each task
//! from there and sums the higher-priority occupancy exactly.

use serde::Serialize;

use crate::engine::simulate;
use crate::error::{Error, Result};
use crate::intervals::{IntervalSet, Span};
use crate::model::{rms_priorities, TaskSet};
use crate::occupancy::occupancy_from_trace;
use crate::rat::Rat;

fn check_highest(exec: Rat, period: Rat, len: Rat) -> Result<()> {
    if Rat::ZERO < exec && exec < period && period < len {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!("need 0 < C1 < T1 < L, got C1={exec} T1={period} L={len}")))
    }
}

/// `C1 * floor(L/T1) + min(T1 * {L/T1}, C1)`, valid for any `L >= T1`.
fn max_highest_occupancy(exec: Rat, period: Rat, len: Rat) -> Rat {
    let q = len / period;
    exec * q.floor() + (period * q.fract()).min(exec)
}

/// Maximal occupancy of the highest-priority task over an interval of
/// length `len`, and the deadline value (`T1`, the synchronous release) at
/// which it is always attained.
pub fn op1_max(exec: Rat, period: Rat, len: Rat) -> Result<(Rat, Rat)> {
    check_highest(exec, period, len)?;
    Ok((max_highest_occupancy(exec, period, len), period))
}

/// Every deadline value `d1` in `(0, T1]` at which the highest-priority
/// task reaches its maximal occupancy over an interval of length `len`.
pub fn worst_deadline_set_highest(exec: Rat, period: Rat, len: Rat) -> Result<IntervalSet> {
    check_highest(exec, period, len)?;
    // len = M*T1 + f with 0 <= f < T1
    let f = period * (len / period).fract();
    let set = if f.is_zero() {
        IntervalSet::new([Span::open_closed(Rat::ZERO, period)])
    } else if f == exec {
        IntervalSet::new([Span::point(period)])
    } else if f < exec {
        IntervalSet::new([Span::closed(period - exec + f, period)])
    } else {
        IntervalSet::new([Span::open_closed(Rat::ZERO, f - exec), Span::point(period)])
    };
    Ok(set)
}

/// Maximal occupancy `C2` of the longer-period task when it holds the
/// higher priority, over one period of the shorter one, and the deadline
/// values attaining it.
pub fn worst_deadline_set_second(exec2: Rat, period2: Rat, period1: Rat) -> Result<(Rat, IntervalSet)> {
    if !(Rat::ZERO < exec2 && exec2 < period2 && Rat::ZERO < period1 && period1 < period2) {
        return Err(Error::DomainViolation(format!(
            "need 0 < C2 < T2 and 0 < T1 < T2, got C2={exec2} T2={period2} T1={period1}"
        )));
    }
    let set = if period1 <= exec2 {
        IntervalSet::new([Span::point(period2)])
    } else {
        IntervalSet::new([Span::open_closed(Rat::ZERO, period1 - exec2), Span::point(period2)])
    };
    Ok((exec2, set))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoTaskOrder {
    /// shorter period first
    Rms,
    /// longer period first
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskBound {
    pub task: String,
    pub schedulable: bool,
    pub margin: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoTaskVerdict {
    pub order: TwoTaskOrder,
    pub tasks: [TaskBound; 2],
}

impl TwoTaskVerdict {
    pub fn all_schedulable(&self) -> bool {
        self.tasks.iter().all(|t| t.schedulable)
    }
}

/// Closed-form worst-case test for two tasks under either static order.
pub fn two_task_wc_test(ts: &TaskSet, order: TwoTaskOrder) -> Result<TwoTaskVerdict> {
    if ts.len() != 2 {
        return Err(Error::DomainViolation(format!("two-task test needs 2 tasks, got {}", ts.len())));
    }
    let (a, b) = (ts.task(0), ts.task(1));
    let bound = |t: &crate::model::TaskSpec, margin: Rat| TaskBound {
        task: t.name.clone(),
        schedulable: !margin.is_negative(),
        margin,
    };
    let tasks = match order {
        TwoTaskOrder::Rms => {
            let interference = max_highest_occupancy(a.exec, a.period, b.period);
            [bound(a, a.period - a.exec), bound(b, b.period - b.exec - interference)]
        }
        TwoTaskOrder::Reversed => [bound(a, a.period - a.exec - b.exec), bound(b, b.period - b.exec)],
    };
    Ok(TwoTaskVerdict { order, tasks })
}

/// `(reversed order schedulable, RMS order schedulable)`; the first implies
/// the second.
pub fn rms_dominance(ts: &TaskSet) -> Result<(bool, bool)> {
    Ok((
        two_task_wc_test(ts, TwoTaskOrder::Reversed)?.all_schedulable(),
        two_task_wc_test(ts, TwoTaskOrder::Rms)?.all_schedulable(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskReport {
    pub task: String,
    /// higher-priority occupancy over one period from the synchronous release
    pub op_max: Rat,
    /// deadline values of the highest-priority task at the start of this
    /// task's period that maximize its occupancy (empty for the top task)
    pub worst_deadlines: IntervalSet,
    pub margin: Rat,
    pub schedulable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstCaseReport {
    pub tasks: Vec<TaskReport>,
}

impl WorstCaseReport {
    pub fn all_schedulable(&self) -> bool {
        self.tasks.iter().all(|t| t.schedulable)
    }
}

/// Exact RMS worst-case test. Offsets are ignored: every task is released
/// at time 0 and task `i` passes when the higher-priority occupancy over
/// `[0, T_i]` plus `C_i` fits in `T_i`.
pub fn n_task_wc_test(ts: &TaskSet) -> WorstCaseReport {
    let sync = ts.with_offsets(&vec![Rat::ZERO; ts.len()]);
    let prio = rms_priorities(&sync);
    let horizon = sync.tasks().iter().map(|t| t.period).max().expect("nonempty");
    let trace = simulate(&sync, &prio, Rat::ZERO, horizon).expect("valid window");
    let top = sync.task(0);
    let tasks = sync
        .tasks()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let op_max: Rat = (0..i)
                .map(|j| occupancy_from_trace(&trace, j, Rat::ZERO, t.period).expect("inside trace"))
                .sum();
            let worst_deadlines = if i == 0 {
                IntervalSet::empty()
            } else if top.period < t.period {
                worst_deadline_set_highest(top.exec, top.period, t.period).expect("checked domain")
            } else {
                // equal periods: occupancy is C1 for every deadline value
                IntervalSet::new([Span::open_closed(Rat::ZERO, top.period)])
            };
            let margin = t.period - t.exec - op_max;
            TaskReport {
                task: t.name.clone(),
                op_max,
                worst_deadlines,
                margin,
                schedulable: !margin.is_negative(),
            }
        })
        .collect();
    WorstCaseReport { tasks }
}
