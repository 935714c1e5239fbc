//! Brute-force cross-checks.
//!
//! [`oracle_simulate`] is a job-level event-queue simulator that shares no
//! code with [`crate::engine`]: it keeps explicit job queues and steps from
//! one queued event to the next in time order. The sweeps
//! evaluate objectives exhaustively on explicit rational grids.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::Interval;
use crate::error::{Error, Result};
use crate::model::{PriorityAssignment, TaskSet};
use crate::occupancy::{op_highest_closed, op_second_closed};
use crate::rat::Rat;

#[derive(Debug, Clone)]
struct Job {
    deadline: Rat,
    remaining: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    // ordering within one instant: deadlines are judged before new jobs arrive
    Deadline { task: usize, deadline: Rat },
    Release { task: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRun {
    /// per task, maximal busy intervals clipped to the window
    pub busy: Vec<Vec<Interval>>,
    /// `(task, deadline)` of every job unfinished at a deadline inside the window
    pub misses: Vec<(usize, Rat)>,
    /// `(task, deadline)` of jobs pending at the window end, with deadline
    /// after it, whose queued work exceeds the time left to that deadline
    pub doomed: Vec<(usize, Rat)>,
}

impl OracleRun {
    /// Tasks with a miss or a doomed job.
    pub fn failing_tasks(&self) -> BTreeSet<usize> {
        self.misses.iter().chain(&self.doomed).map(|&(t, _)| t).collect()
    }
}

fn record(busy: &mut [Vec<Interval>], task: usize, from: Rat, to: Rat, lo: Rat) {
    let from = from.max(lo);
    if to <= from {
        return;
    }
    let list = &mut busy[task];
    if let Some(last) = list.last_mut() {
        if last.end == from {
            last.end = to;
            return;
        }
    }
    list.push(Interval { start: from, end: to });
}

/// Simulates from time 0 and reports busy intervals and deadline misses
/// inside `[start, end]`.
pub fn oracle_simulate(ts: &TaskSet, prio: &PriorityAssignment, start: Rat, end: Rat) -> Result<OracleRun> {
    if start.is_negative() || end < start {
        return Err(Error::InvalidWindow { start, end });
    }
    let n = ts.len();
    let mut queues: Vec<VecDeque<Job>> = vec![VecDeque::new(); n];
    let mut events: BinaryHeap<Reverse<(Rat, Event)>> = BinaryHeap::new();
    for (k, t) in ts.tasks().iter().enumerate() {
        events.push(Reverse((t.offset, Event::Release { task: k })));
    }
    let mut busy = vec![Vec::new(); n];
    let mut misses = Vec::new();
    let mut now = Rat::ZERO;

    loop {
        let running = prio.order().iter().copied().find(|&k| !queues[k].is_empty());
        let next_event = events.peek().map(|Reverse((t, _))| *t).unwrap_or(end);
        let mut until = next_event.min(end);
        if let Some(k) = running {
            until = until.min(now + queues[k][0].remaining);
        }
        if let Some(k) = running {
            let job = &mut queues[k][0];
            job.remaining -= until - now;
            record(&mut busy, k, now, until, start);
            if job.remaining.is_zero() {
                queues[k].pop_front();
            }
        }
        now = until;
        // all events at `now` (deadlines before releases)
        while let Some(&Reverse((t, ev))) = events.peek() {
            if t != now || (now == end && matches!(ev, Event::Release { .. })) {
                break;
            }
            events.pop();
            match ev {
                Event::Deadline { task, deadline } => {
                    let late = queues[task].iter().any(|j| j.deadline == deadline);
                    if late && deadline >= start {
                        misses.push((task, deadline));
                    }
                }
                Event::Release { task } => {
                    let spec = ts.task(task);
                    let deadline = now + spec.period;
                    queues[task].push_back(Job { deadline, remaining: spec.exec });
                    events.push(Reverse((deadline, Event::Deadline { task, deadline })));
                    events.push(Reverse((deadline, Event::Release { task })));
                }
            }
        }
        if now >= end {
            break;
        }
    }

    let mut doomed = Vec::new();
    for (k, q) in queues.iter().enumerate() {
        if let Some(last) = q.back() {
            let queued: Rat = q.iter().map(|j| j.remaining).sum();
            if last.deadline > end && queued > last.deadline - end {
                doomed.push((k, last.deadline));
            }
        }
    }
    misses.sort();
    Ok(OracleRun { busy, misses, doomed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub coords: Vec<Rat>,
    pub value: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepResult {
    pub grid: String,
    pub points: Vec<SweepPoint>,
    pub argmax: Vec<Vec<Rat>>,
    pub max: Rat,
}

impl SweepResult {
    fn from_points(grid: String, points: Vec<SweepPoint>) -> SweepResult {
        let max = points.iter().map(|p| p.value).max().expect("nonempty grid");
        let argmax = points.iter().filter(|p| p.value == max).map(|p| p.coords.clone()).collect();
        SweepResult { grid, points, argmax, max }
    }
}

fn grid_below(limit: Rat, step: Rat) -> Vec<Rat> {
    let mut v = Vec::new();
    let mut x = Rat::ZERO;
    while x < limit {
        v.push(x);
        x += step;
    }
    v
}

/// Higher-priority (RMS) occupancy over one period of task `i` for every
/// phasing of the higher-priority tasks on a grid of `grid_step` over
/// `[0, T_j)`.
///
/// Only the higher-priority tasks influence that occupancy, so only their
/// offsets are swept; task `i` is released at time 0. Measurement starts
/// after one hyperperiod of tasks `0..=i`, at a release of task `i` where
/// each swept offset equals the phase of that task.
pub fn phase_sweep_occupancy(ts: &TaskSet, i: usize, grid_step: Rat) -> Result<SweepResult> {
    if !grid_step.is_positive() {
        return Err(Error::DomainViolation(format!("grid step {grid_step} must be positive")));
    }
    if i >= ts.len() {
        return Err(Error::UnknownTask(i.to_string()));
    }
    let grid = format!("offsets of tasks 0..{i} on multiples of {grid_step} in [0, T_j)");
    if i == 0 {
        return Ok(SweepResult::from_points(grid, vec![SweepPoint { coords: vec![], value: Rat::ZERO }]));
    }
    let hp: Vec<_> = ts.tasks()[..i].to_vec();
    let hp_set = TaskSet::validate(hp).expect("subset of a valid set");
    let prio = crate::model::rms_priorities(&hp_set);
    let period_i = ts.task(i).period;
    let warmup = ts.tasks()[..=i].iter().skip(1).fold(ts.task(0).period, |h, t| h.lcm(&t.period));

    let axes: Vec<Vec<Rat>> = (0..i).map(|j| grid_below(ts.task(j).period, grid_step)).collect();
    let mut vectors: Vec<Vec<Rat>> = vec![vec![]];
    for axis in &axes {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                axis.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }

    let points = vectors
        .into_par_iter()
        .map(|offsets| {
            let shifted = hp_set.with_offsets(&offsets);
            let run = oracle_simulate(&shifted, &prio, warmup, warmup + period_i)?;
            let value = run.busy.iter().flatten().map(|iv| iv.len()).sum();
            Ok(SweepPoint { coords: offsets, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_points(grid, points))
}

/// Closed-form objective evaluated over a deadline grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeadlineObjective {
    /// highest-priority task `(C1, T1)` over an interval of length `len`
    OpHighest { exec: Rat, period: Rat, len: Rat },
    /// longer-period task `(C2, T2)` at higher priority over one period `T1`
    OpSecond { exec2: Rat, period2: Rat, period1: Rat },
}

impl DeadlineObjective {
    fn period(&self) -> Rat {
        match *self {
            DeadlineObjective::OpHighest { period, .. } => period,
            DeadlineObjective::OpSecond { period2, .. } => period2,
        }
    }

    pub fn eval(&self, d: Rat) -> Result<Rat> {
        match *self {
            DeadlineObjective::OpHighest { exec, period, len } => op_highest_closed(d, exec, period, len),
            DeadlineObjective::OpSecond { exec2, period2, period1 } => op_second_closed(d, exec2, period2, period1),
        }
    }

    /// Case boundaries of the piecewise form.
    fn boundaries(&self) -> Vec<Rat> {
        match *self {
            DeadlineObjective::OpHighest { exec, period, len } => {
                let f = period * (len / period).fract();
                vec![period - exec, f, f - exec, period - exec + f, period]
            }
            DeadlineObjective::OpSecond { exec2, period2, period1 } => {
                vec![period2 - exec2, period1, period1 - exec2, period2]
            }
        }
    }
}

/// Grid of `(0, T]` in steps of `grid_step`, plus every case boundary and
/// points a small off-grid distance either side of it.
pub fn deadline_grid(objective: &DeadlineObjective, grid_step: Rat) -> Vec<Rat> {
    let period = objective.period();
    let mut pts: BTreeSet<Rat> = BTreeSet::new();
    let mut x = grid_step;
    while x <= period {
        pts.insert(x);
        x += grid_step;
    }
    let nudge = grid_step / Rat::int(7);
    for b in objective.boundaries() {
        for p in [b - nudge, b, b + nudge] {
            pts.insert(p);
        }
    }
    pts.insert(period);
    pts.into_iter().filter(|&d| d.is_positive() && d <= period).collect()
}

pub fn deadline_grid_max(objective: &DeadlineObjective, grid_step: Rat) -> Result<SweepResult> {
    if !grid_step.is_positive() {
        return Err(Error::DomainViolation(format!("grid step {grid_step} must be positive")));
    }
    let points = deadline_grid(objective, grid_step)
        .into_iter()
        .map(|d| Ok(SweepPoint { coords: vec![d], value: objective.eval(d)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_points(format!("deadline grid step {grid_step} with case boundaries"), points))
}
