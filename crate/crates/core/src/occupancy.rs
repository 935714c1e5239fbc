//! Time-occupancy: how much of an interval a task holds the resource.
//!
//! [`occupancy_from_trace`] measures it on a simulated schedule. The other
//! functions are closed forms for special situations (highest-priority
//! task, one period of a shorter-period task, the tail of the last
//! incomplete period) that are checked against the measured value.

use serde::Serialize;

use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::model::PriorityAssignment;
use crate::rat::Rat;

fn domain(msg: String) -> Error {
    Error::DomainViolation(msg)
}

/// Total time task `i` occupies the resource within `[t1, t2]`.
pub fn occupancy_from_trace(trace: &Trace, i: usize, t1: Rat, t2: Rat) -> Result<Rat> {
    if t1 < trace.start || t2 > trace.end || t2 < t1 {
        return Err(Error::IntervalOutsideTrace { t1, t2, start: trace.start, end: trace.end });
    }
    if i >= trace.busy.len() {
        return Err(Error::UnknownTask(i.to_string()));
    }
    Ok(trace.busy[i].iter().map(|iv| iv.overlap(t1, t2)).sum())
}

/// Remaining demand of a highest-priority task whose deadline variable is
/// `d`: it has run undisturbed since its release `T - d` ago.
pub fn remaining_highest(d: Rat, exec: Rat, period: Rat) -> Rat {
    (d - (period - exec)).max(Rat::ZERO)
}

/// `C * floor(x / T) + min(T * {x / T}, C)`: occupancy of `x` time units
/// that start exactly at a release of an undisturbed task.
fn periods_and_tail(span: Rat, exec: Rat, period: Rat) -> Rat {
    let q = span / period;
    exec * q.floor() + (period * q.fract()).min(exec)
}

/// Occupancy of the highest-priority task over an interval of length `len`
/// whose start sees its deadline variable at `d1`.
pub fn op_highest_closed(d1: Rat, exec: Rat, period: Rat, len: Rat) -> Result<Rat> {
    if !(Rat::ZERO < exec && exec < period && period < len) {
        return Err(domain(format!("need 0 < C < T < L, got C={exec} T={period} L={len}")));
    }
    if !(Rat::ZERO < d1 && d1 <= period) {
        return Err(domain(format!("need 0 < d <= T, got d={d1} T={period}")));
    }
    let steady = periods_and_tail(len - d1, exec, period);
    if d1 <= period - exec {
        Ok(steady)
    } else {
        Ok(d1 - (period - exec) + steady)
    }
}

/// Occupancy of a longer-period task (`exec2`, `period2`) that holds the
/// higher priority, over one period `period1` of the other task, when its
/// deadline variable at the interval start is `d2`.
///
/// The three cases follow the printed piecewise form. In the first case a
/// release at `d2 >= period1` lies outside the interval and contributes
/// nothing, so the value is floored at zero there.
pub fn op_second_closed(d2: Rat, exec2: Rat, period2: Rat, period1: Rat) -> Result<Rat> {
    if !(Rat::ZERO < exec2 && exec2 < period2 && period1 < period2 && period1.is_positive()) {
        return Err(domain(format!(
            "need 0 < C2 < T2 and 0 < T1 < T2, got C2={exec2} T2={period2} T1={period1}"
        )));
    }
    if !(Rat::ZERO < d2 && d2 <= period2) {
        return Err(domain(format!("need 0 < d2 <= T2, got d2={d2} T2={period2}")));
    }
    let v = if d2 <= period2 - exec2 {
        (period1 - d2).min(exec2).max(Rat::ZERO)
    } else if d2 <= period1 {
        period1 - period2 + exec2
    } else {
        // exceeds period1 when exec2 > period1; kept as printed
        d2 - (period2 - exec2)
    };
    Ok(v)
}

/// Demanded occupancy over `[t, t + len]` of a task whose state at `t` is
/// `(d, r)`: the carried-in demand `r`, plus `C` for every complete period
/// after the next release, plus the tail `min(remaining length, C)`.
pub fn demand_occupancy(d: Rat, r: Rat, exec: Rat, period: Rat, len: Rat) -> Rat {
    if len <= d {
        return r;
    }
    r + periods_and_tail(len - d, exec, period)
}

/// Tail occupancy of higher-priority task `j` in the last incomplete period
/// of `j` inside `[t_w0, t_w0 + T_i]`, where `t_w0` is a release of task `i`.
/// The competing higher-priority occupancies inside that tail are measured
/// from the trace.
pub fn tau_e_last_period(trace: &Trace, j: usize, i: usize, t_w0: Rat) -> Result<Rat> {
    Ok(last_period_split(trace, j, i, t_w0)?.tail)
}

/// The three parts of task `j`'s occupancy over one period of task `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OccupancySplit {
    /// remaining demand at `t_w0`
    pub carried: Rat,
    /// `C_j` times the number of complete periods
    pub full: Rat,
    /// work in the last incomplete period
    pub tail: Rat,
}

impl OccupancySplit {
    pub fn total(&self) -> Rat {
        self.carried + self.full + self.tail
    }
}

pub fn last_period_split(trace: &Trace, j: usize, i: usize, t_w0: Rat) -> Result<OccupancySplit> {
    let ts = &trace.taskset;
    let prio = &trace.priority;
    if !prio.is_higher(j, i) {
        return Err(domain(format!("task {j} does not have higher priority than task {i}")));
    }
    let released_i = trace
        .moments
        .iter()
        .any(|m| m.time == t_w0 && m.released.contains(&i));
    if !released_i {
        return Err(domain(format!("task {i} is not released at {t_w0}")));
    }
    let (tj, cj, ti) = (ts.task(j).period, ts.task(j).exec, ts.task(i).period);
    let end = t_w0 + ti;
    let state = trace.state_after(t_w0)?;
    let dj = state.d[j];
    if dj > ti {
        return Err(domain(format!("deadline variable {dj} of task {j} exceeds window {ti}")));
    }
    let q = (ti - dj) / tj;
    let tail_start = t_w0 + dj + tj * q.floor();
    let contention: Rat = prio
        .higher_than(j)
        .iter()
        .map(|&h| occupancy_from_trace(trace, h, tail_start, end))
        .sum::<Result<Rat>>()?;
    Ok(OccupancySplit {
        carried: state.r[j],
        full: cj * q.floor(),
        tail: (tj * q.fract() - contention).min(cj),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimOutcome {
    pub occupancy: Vec<Rat>,
    pub per_task: Vec<bool>,
    pub all: bool,
}

/// Interval test on given occupancies: task `i` passes when its own
/// occupancy plus those of all higher-priority tasks fit in `len`; the
/// whole set passes when the total fits.
pub fn claim_check(prio: &PriorityAssignment, len: Rat, occupancy: &[Rat]) -> ClaimOutcome {
    let per_task = (0..occupancy.len())
        .map(|i| {
            let hp: Rat = prio.higher_than(i).iter().map(|&j| occupancy[j]).sum();
            hp + occupancy[i] <= len
        })
        .collect();
    let total: Rat = occupancy.iter().sum();
    ClaimOutcome { occupancy: occupancy.to_vec(), per_task, all: total <= len }
}

/// Interval test over `[t1, t2]` with each task's demand computed from its
/// state at `t1` by [`demand_occupancy`].
pub fn claim_interval_test(trace: &Trace, t1: Rat, t2: Rat) -> Result<ClaimOutcome> {
    if t1 < trace.start || t2 > trace.end || t2 < t1 {
        return Err(Error::IntervalOutsideTrace { t1, t2, start: trace.start, end: trace.end });
    }
    let s = trace.state_after(t1)?;
    let occ: Vec<Rat> = trace
        .taskset
        .tasks()
        .iter()
        .enumerate()
        .map(|(k, t)| demand_occupancy(s.d[k], s.r[k], t.exec, t.period, t2 - t1))
        .collect();
    Ok(claim_check(&trace.priority, t2 - t1, &occ))
}
