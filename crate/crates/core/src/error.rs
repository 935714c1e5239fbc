use thiserror::Error;

use crate::rat::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("task `{name}`: period {period} must be positive")]
    NonPositivePeriod { name: String, period: Rat },
    #[error("task `{name}`: execution time {exec} must be positive")]
    NonPositiveExec { name: String, exec: Rat },
    #[error("task `{name}`: execution time {exec} must be less than period {period}")]
    ExecNotLessThanPeriod { name: String, exec: Rat, period: Rat },
    #[error("task `{name}`: offset {offset} must be non-negative")]
    NegativeOffset { name: String, offset: Rat },
    #[error("duplicate task name `{0}`")]
    DuplicateName(String),
    #[error("invalid priority assignment: {0}")]
    InvalidPriority(String),
    #[error("no task with index or name `{0}`")]
    UnknownTask(String),
    #[error("invalid window [{start}, {end}]")]
    InvalidWindow { start: Rat, end: Rat },
    #[error("window exhausted: time {time} is not before window end {end}")]
    WindowExhausted { time: Rat, end: Rat },
    #[error("evolution to {target} skips the release at {next_release}")]
    ReleaseSkipped { target: Rat, next_release: Rat },
    #[error("interval [{t1}, {t2}] is outside the trace window [{start}, {end}]")]
    IntervalOutsideTrace { t1: Rat, t2: Rat, start: Rat, end: Rat },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}
