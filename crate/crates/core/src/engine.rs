//! Timing-state evolution and schedule traces.
//!
//! The state `(d, r, o)` of every task is advanced from one significant
//! moment to the next. Significant moments are releases of some task or the
//! end of the window; between two of them no task is released, so the
//! state follows closed-form linear pieces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PriorityAssignment, TaskSet};
use crate::rat::Rat;

/// Per-task timing state at one instant.
///
/// * `d[i]`: time until the next release of task `i`
/// * `r[i]`: outstanding execution demand of task `i` (includes backlog of
///   late jobs)
/// * `o[i]`: elapsed response time of the most recent job of task `i`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingState {
    pub time: Rat,
    pub d: Vec<Rat>,
    pub r: Vec<Rat>,
    pub o: Vec<Rat>,
}

impl TimingState {
    /// State at time 0, before any release is processed: `d[i] = offset[i]`.
    pub fn initial(ts: &TaskSet) -> TimingState {
        TimingState {
            time: Rat::ZERO,
            d: ts.tasks().iter().map(|t| t.offset).collect(),
            r: vec![Rat::ZERO; ts.len()],
            o: vec![Rat::ZERO; ts.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

/// Next significant moment after `state.time`, capped at `t_end`.
pub fn next_significant_moment(state: &TimingState, t_end: Rat) -> Result<Rat> {
    if state.time >= t_end {
        return Err(Error::WindowExhausted { time: state.time, end: t_end });
    }
    let step = state.d.iter().copied().fold(t_end - state.time, Rat::min);
    Ok(state.time + step)
}

/// Left limit of the state at `t`, assuming no release happens in
/// `(state.time, t)`.
pub fn evolve_to(state: &TimingState, prio: &PriorityAssignment, t: Rat) -> Result<TimingState> {
    let dt = t - state.time;
    if dt.is_negative() {
        return Err(Error::DomainViolation(format!("cannot evolve backwards from {} to {t}", state.time)));
    }
    if let Some(&dmin) = state.d.iter().min() {
        if dt > dmin {
            return Err(Error::ReleaseSkipped { target: t, next_release: state.time + dmin });
        }
    }
    let mut next = state.clone();
    next.time = t;
    // higher-priority work pending at the start of the gap
    let mut ahead = Rat::ZERO;
    for &i in prio.order() {
        let r0 = state.r[i];
        next.d[i] = state.d[i] - dt;
        if r0.is_positive() {
            let served = (dt - ahead).max(Rat::ZERO);
            next.r[i] = (r0 - served).max(Rat::ZERO);
            // the job keeps accruing response time until it completes
            next.o[i] = state.o[i] + dt.min(ahead + r0);
        }
        ahead += r0;
    }
    Ok(next)
}

/// A release of task `task` found its previous job(s) unfinished.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadlineMiss {
    pub task: usize,
    pub deadline: Rat,
    pub backlog: Rat,
}

/// Applies every release due at `left.time` (tasks with `d == 0`).
pub fn apply_releases(ts: &TaskSet, left: &TimingState) -> (TimingState, Vec<usize>, Vec<DeadlineMiss>) {
    let mut after = left.clone();
    let mut released = Vec::new();
    let mut misses = Vec::new();
    for (i, task) in ts.tasks().iter().enumerate() {
        if left.d[i].is_zero() {
            if left.r[i].is_positive() {
                misses.push(DeadlineMiss { task: i, deadline: left.time, backlog: left.r[i] });
            }
            after.d[i] = task.period;
            after.r[i] = left.r[i] + task.exec;
            after.o[i] = Rat::ZERO;
            released.push(i);
        }
    }
    (after, released, misses)
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Interval {
    pub start: Rat,
    pub end: Rat,
}

impl Interval {
    pub fn len(&self) -> Rat {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Length of the overlap with `[lo, hi]`.
    pub fn overlap(&self, lo: Rat, hi: Rat) -> Rat {
        (self.end.min(hi) - self.start.max(lo)).max(Rat::ZERO)
    }
}

/// Appends `[start, end)`, merging with the last interval when they abut.
pub(crate) fn push_coalesced(list: &mut Vec<Interval>, start: Rat, end: Rat) {
    if end <= start {
        return;
    }
    match list.last_mut() {
        Some(last) if last.end == start => last.end = end,
        _ => list.push(Interval { start, end }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Moment {
    pub time: Rat,
    pub left: TimingState,
    pub after: TimingState,
    pub released: Vec<usize>,
}

/// Schedule over a finite window `[start, end]`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub taskset: TaskSet,
    pub priority: PriorityAssignment,
    pub start: Rat,
    pub end: Rat,
    pub moments: Vec<Moment>,
    /// Per task, maximal disjoint busy intervals in time order.
    pub busy: Vec<Vec<Interval>>,
    pub misses: Vec<DeadlineMiss>,
}

impl Trace {
    /// Left-limit state at any `t` inside the window.
    pub fn state_at(&self, t: Rat) -> Result<TimingState> {
        if t < self.start || t > self.end {
            return Err(Error::IntervalOutsideTrace { t1: t, t2: t, start: self.start, end: self.end });
        }
        let k = self.moments.partition_point(|m| m.time <= t) - 1;
        let m = &self.moments[k];
        if m.time == t {
            Ok(m.left.clone())
        } else {
            evolve_to(&m.after, &self.priority, t)
        }
    }

    /// State just after the jumps at `t` (equal to the left limit when `t`
    /// is not a release moment).
    pub fn state_after(&self, t: Rat) -> Result<TimingState> {
        let left = self.state_at(t)?;
        match self.moments.binary_search_by(|m| m.time.cmp(&t)) {
            Ok(k) => Ok(self.moments[k].after.clone()),
            Err(_) => Ok(left),
        }
    }

    pub fn moment_times(&self) -> Vec<Rat> {
        self.moments.iter().map(|m| m.time).collect()
    }

    /// Gantt rows `task,start,end`, ordered by start time.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(Interval, &str)> = self
            .busy
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |iv| (*iv, i)))
            .map(|(iv, i)| (iv, self.taskset.task(i).name.as_str()))
            .collect();
        rows.sort();
        let mut out = String::from("task,start,end\n");
        for (iv, name) in rows {
            out.push_str(&format!("{name},{},{}\n", iv.start, iv.end));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names: Vec<&str> = self.taskset.tasks().iter().map(|t| t.name.as_str()).collect();
        let busy: serde_json::Map<String, serde_json::Value> = self
            .busy
            .iter()
            .enumerate()
            .map(|(i, list)| {
                let spans: Vec<[Rat; 2]> = list.iter().map(|iv| [iv.start, iv.end]).collect();
                (names[i].to_string(), serde_json::to_value(spans).expect("serializable"))
            })
            .collect();
        let misses: Vec<serde_json::Value> = self
            .misses
            .iter()
            .map(|m| serde_json::json!({"task": names[m.task], "deadline": m.deadline, "backlog": m.backlog}))
            .collect();
        serde_json::json!({
            "tasks": names,
            "window": [self.start, self.end],
            "moments": self.moments,
            "busy": busy,
            "deadline_misses": misses,
        })
    }
}

/// Runs from time 0 (or from a supplied left-limit state) up to the left
/// limit at `t`, without recording anything.
fn advance(ts: &TaskSet, prio: &PriorityAssignment, mut state: TimingState, t: Rat) -> Result<TimingState> {
    while state.time < t {
        let (after, _, _) = apply_releases(ts, &state);
        let next = next_significant_moment(&after, t)?;
        state = evolve_to(&after, prio, next)?;
    }
    Ok(state)
}

/// Simulates the schedule from time 0 and records the window `[start, end]`.
pub fn simulate(ts: &TaskSet, prio: &PriorityAssignment, start: Rat, end: Rat) -> Result<Trace> {
    if start.is_negative() || end < start {
        return Err(Error::InvalidWindow { start, end });
    }
    let seed = advance(ts, prio, TimingState::initial(ts), start)?;
    simulate_from(ts, prio, seed, end)
}

/// Records the schedule from the left-limit state `seed` up to `end`.
pub fn simulate_from(ts: &TaskSet, prio: &PriorityAssignment, seed: TimingState, end: Rat) -> Result<Trace> {
    if seed.len() != ts.len() || prio.len() != ts.len() {
        return Err(Error::DomainViolation("state, priorities and task set differ in size".into()));
    }
    if end < seed.time {
        return Err(Error::InvalidWindow { start: seed.time, end });
    }
    let start = seed.time;
    let mut moments = Vec::new();
    let mut busy = vec![Vec::new(); ts.len()];
    let mut misses = Vec::new();
    let mut left = seed;
    loop {
        let (after, released, mut missed) = apply_releases(ts, &left);
        misses.append(&mut missed);
        let now = left.time;
        moments.push(Moment { time: now, left, after: after.clone(), released });
        if now >= end {
            break;
        }
        let next = next_significant_moment(&after, end)?;
        // the highest-priority pending task runs; on completion the next one takes over
        let mut cursor = now;
        for &i in prio.order() {
            if cursor >= next {
                break;
            }
            if after.r[i].is_positive() {
                let stop = (cursor + after.r[i]).min(next);
                push_coalesced(&mut busy[i], cursor, stop);
                cursor = stop;
            }
        }
        left = evolve_to(&after, prio, next)?;
    }
    Ok(Trace { taskset: ts.clone(), priority: prio.clone(), start, end, moments, busy, misses })
}
