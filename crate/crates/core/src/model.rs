//! Task model: periodic tasks, validated task sets, priority assignments and
//! the task-set JSON format.

use std::collections::HashSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// One periodic task: first release at `offset`, then every `period`, each
/// job demanding `exec` units of the resource.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    #[serde(default)]
    pub offset: Rat,
    pub period: Rat,
    pub exec: Rat,
}

impl TaskSpec {
    pub fn new(name: impl Into<String>, offset: Rat, period: Rat, exec: Rat) -> TaskSpec {
        TaskSpec { name: name.into(), offset, period, exec }
    }

    pub fn utilization(&self) -> Rat {
        self.exec / self.period
    }
}

/// A validated task set, stored in ascending period order. Ties keep their
/// input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    tasks: Vec<TaskSpec>,
    /// `input_index[k]` is the position in the original input of the task
    /// stored at sorted position `k`.
    input_index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetFile {
    pub tasks: Vec<TaskSpec>,
}

impl TaskSet {
    /// Validates raw tasks and sorts them by `(period, input position)`.
    pub fn validate(raw: Vec<TaskSpec>) -> Result<TaskSet> {
        if raw.is_empty() {
            return Err(Error::EmptyTaskSet);
        }
        let mut seen = HashSet::new();
        for t in &raw {
            if !t.period.is_positive() {
                return Err(Error::NonPositivePeriod { name: t.name.clone(), period: t.period });
            }
            if !t.exec.is_positive() {
                return Err(Error::NonPositiveExec { name: t.name.clone(), exec: t.exec });
            }
            if t.exec >= t.period {
                return Err(Error::ExecNotLessThanPeriod {
                    name: t.name.clone(),
                    exec: t.exec,
                    period: t.period,
                });
            }
            if t.offset.is_negative() {
                return Err(Error::NegativeOffset { name: t.name.clone(), offset: t.offset });
            }
            if !seen.insert(t.name.as_str()) {
                return Err(Error::DuplicateName(t.name.clone()));
            }
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].period.cmp(&raw[b].period).then(a.cmp(&b)));
        let tasks = order.iter().map(|&k| raw[k].clone()).collect();
        Ok(TaskSet { tasks, input_index: order })
    }

    /// Convenience constructor from `(name, offset, period, exec)` tuples.
    pub fn from_tuples<S: Into<String>>(raw: Vec<(S, Rat, Rat, Rat)>) -> Result<TaskSet> {
        TaskSet::validate(
            raw.into_iter()
                .map(|(n, o, p, e)| TaskSpec::new(n, o, p, e))
                .collect(),
        )
    }

    /// Synchronous task set from `(exec, period)` pairs, named `t1, t2, ...`.
    pub fn synchronous(pairs: &[(Rat, Rat)]) -> Result<TaskSet> {
        TaskSet::validate(
            pairs
                .iter()
                .enumerate()
                .map(|(k, &(c, t))| TaskSpec::new(format!("t{}", k + 1), Rat::ZERO, t, c))
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<TaskSet> {
        // serde_json errors already carry "at line L column C"
        let file: TaskSetFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("task set JSON: {e}")))?;
        TaskSet::validate(file.tasks)
    }

    /// Serializes in original input order, so that `from_json(to_json(ts)) == ts`.
    pub fn to_file(&self) -> TaskSetFile {
        let mut slots: Vec<Option<TaskSpec>> = vec![None; self.len()];
        for (k, &orig) in self.input_index.iter().enumerate() {
            slots[orig] = Some(self.tasks[k].clone());
        }
        TaskSetFile { tasks: slots.into_iter().map(|t| t.expect("permutation")).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn task(&self, i: usize) -> &TaskSpec {
        &self.tasks[i]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn input_index(&self, i: usize) -> usize {
        self.input_index[i]
    }

    /// Sorted position of the task given either as its name or as a 1-based
    /// sorted index.
    pub fn resolve(&self, key: &str) -> Result<usize> {
        if let Some(k) = self.tasks.iter().position(|t| t.name == key) {
            return Ok(k);
        }
        match key.parse::<usize>() {
            Ok(n) if n >= 1 && n <= self.len() => Ok(n - 1),
            _ => Err(Error::UnknownTask(key.to_string())),
        }
    }

    /// Same tasks with every offset replaced.
    pub fn with_offsets(&self, offsets: &[Rat]) -> TaskSet {
        assert_eq!(offsets.len(), self.len());
        let mut ts = self.clone();
        for (t, &o) in ts.tasks.iter_mut().zip(offsets) {
            t.offset = o;
        }
        ts
    }

    pub fn hyperperiod(&self) -> Rat {
        self.tasks.iter().skip(1).fold(self.tasks[0].period, |h, t| h.lcm(&t.period))
    }
}

/// Static priority ranks, one per task in sorted order; rank 1 is the
/// highest priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityAssignment {
    ranks: Vec<usize>,
    /// task indices from highest to lowest priority
    order: Vec<usize>,
}

impl PriorityAssignment {
    pub fn from_ranks(ranks: Vec<usize>) -> Result<PriorityAssignment> {
        let n = ranks.len();
        let mut order = vec![usize::MAX; n];
        for (task, &rank) in ranks.iter().enumerate() {
            if rank == 0 || rank > n {
                return Err(Error::InvalidPriority(format!("rank {rank} outside 1..={n}")));
            }
            if order[rank - 1] != usize::MAX {
                return Err(Error::InvalidPriority(format!("rank {rank} used twice")));
            }
            order[rank - 1] = task;
        }
        Ok(PriorityAssignment { ranks, order })
    }

    /// Ranks given per task in the task set's original input order.
    pub fn from_input_ranks(ts: &TaskSet, input_ranks: &[usize]) -> Result<PriorityAssignment> {
        if input_ranks.len() != ts.len() {
            return Err(Error::InvalidPriority(format!(
                "{} ranks given for {} tasks",
                input_ranks.len(),
                ts.len()
            )));
        }
        PriorityAssignment::from_ranks((0..ts.len()).map(|k| input_ranks[ts.input_index(k)]).collect())
    }

    pub fn rank(&self, task: usize) -> usize {
        self.ranks[task]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Task indices from highest to lowest priority.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn is_higher(&self, a: usize, b: usize) -> bool {
        self.ranks[a] < self.ranks[b]
    }

    /// Tasks with higher priority than `task`.
    pub fn higher_than(&self, task: usize) -> &[usize] {
        &self.order[..self.ranks[task] - 1]
    }
}

/// Rate-monotonic ranks. The task set is already sorted by period with ties
/// in input order, so rank equals sorted position.
pub fn rms_priorities(ts: &TaskSet) -> PriorityAssignment {
    PriorityAssignment::from_ranks((1..=ts.len()).collect()).expect("identity is a bijection")
}

/// CLI priority selector: `rms` or `explicit:<comma-separated ranks>` with
/// ranks listed in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrioritySpec {
    Rms,
    Explicit(Vec<usize>),
}

impl PrioritySpec {
    pub fn resolve(&self, ts: &TaskSet) -> Result<PriorityAssignment> {
        match self {
            PrioritySpec::Rms => Ok(rms_priorities(ts)),
            PrioritySpec::Explicit(r) => PriorityAssignment::from_input_ranks(ts, r),
        }
    }
}

impl FromStr for PrioritySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<PrioritySpec> {
        if s == "rms" {
            return Ok(PrioritySpec::Rms);
        }
        let list = s
            .strip_prefix("explicit:")
            .ok_or_else(|| Error::InvalidPriority(format!("expected `rms` or `explicit:<ranks>`, got {s:?}")))?;
        list.split(',')
            .map(|r| r.trim().parse::<usize>().map_err(|_| Error::InvalidPriority(format!("bad rank {r:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PrioritySpec::Explicit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i128) -> Rat {
        Rat::int(n)
    }

    fn names(ts: &TaskSet) -> Vec<&str> {
        ts.tasks().iter().map(|t| t.name.as_str()).collect()
    }

    #[test]
    fn validate_sorted_input() {
        let ts = TaskSet::from_tuples(vec![("a", r(0), r(2), r(1)), ("b", r(0), r(5), r(1))]).unwrap();
        assert_eq!(names(&ts), ["a", "b"]);
    }

    #[test]
    fn validate_sorts_by_period() {
        let ts = TaskSet::from_tuples(vec![("b", r(0), r(5), r(1)), ("a", r(0), r(2), r(1))]).unwrap();
        assert_eq!(names(&ts), ["a", "b"]);
        assert_eq!(ts.input_index(0), 1);
    }

    #[test]
    fn validate_errors() {
        let e = TaskSet::from_tuples(vec![("a", r(0), r(2), r(3))]).unwrap_err();
        assert!(matches!(e, Error::ExecNotLessThanPeriod { .. }));
        let e = TaskSet::from_tuples(vec![("a", r(0), r(2), r(2))]).unwrap_err();
        assert!(matches!(e, Error::ExecNotLessThanPeriod { .. }));
        let e = TaskSet::from_tuples(vec![("a", r(0), r(0), r(1))]).unwrap_err();
        assert!(matches!(e, Error::NonPositivePeriod { .. }));
        let e = TaskSet::from_tuples(vec![("a", r(0), r(2), r(0))]).unwrap_err();
        assert!(matches!(e, Error::NonPositiveExec { .. }));
        let e = TaskSet::from_tuples(vec![("a", r(-1), r(2), r(1))]).unwrap_err();
        assert!(matches!(e, Error::NegativeOffset { .. }));
        let e = TaskSet::from_tuples(vec![("a", r(0), r(2), r(1)), ("a", r(0), r(3), r(1))]).unwrap_err();
        assert_eq!(e, Error::DuplicateName("a".into()));
        assert_eq!(TaskSet::validate(vec![]).unwrap_err(), Error::EmptyTaskSet);
    }

    #[test]
    fn rms_ranks() {
        let ts = TaskSet::from_tuples(vec![("a", r(0), r(2), r(1)), ("b", r(0), r(5), r(1))]).unwrap();
        assert_eq!(rms_priorities(&ts).ranks(), [1, 2]);

        let ts = TaskSet::from_tuples(vec![("slow", r(0), r(5), r(1)), ("fast", r(0), r(2), r(1))]).unwrap();
        let p = rms_priorities(&ts);
        assert_eq!(p.rank(ts.resolve("fast").unwrap()), 1);

        let ts = TaskSet::from_tuples(vec![("x", r(0), r(3), r(1)), ("y", r(0), r(3), r(1))]).unwrap();
        let p = rms_priorities(&ts);
        assert_eq!(p.rank(ts.resolve("x").unwrap()), 1);
        assert_eq!(p.rank(ts.resolve("y").unwrap()), 2);
    }

    #[test]
    fn explicit_priorities_follow_input_order() {
        let ts = TaskSet::from_tuples(vec![("slow", r(0), r(5), r(1)), ("fast", r(0), r(2), r(1))]).unwrap();
        let p: PrioritySpec = "explicit:1,2".parse().unwrap();
        let p = p.resolve(&ts).unwrap();
        assert_eq!(p.rank(ts.resolve("slow").unwrap()), 1);
        assert_eq!(p.higher_than(ts.resolve("fast").unwrap()), [ts.resolve("slow").unwrap()]);
        assert!("explicit:1,1".parse::<PrioritySpec>().unwrap().resolve(&ts).is_err());
        assert!("explicit:1".parse::<PrioritySpec>().unwrap().resolve(&ts).is_err());
        assert!("edf".parse::<PrioritySpec>().is_err());
    }

    #[test]
    fn json_schema() {
        let ts = TaskSet::from_json(
            r#"{"tasks":[{"name":"b","offset":0,"period":"5","exec":"1/2"},{"name":"a","period":2,"exec":1}]}"#,
        )
        .unwrap();
        assert_eq!(names(&ts), ["a", "b"]);
        assert_eq!(ts.task(1).exec, Rat::frac(1, 2));
        assert!(TaskSet::from_json(r#"{"tasks":[{"name":"a","offset":0,"period":2.0,"exec":1}]}"#).is_err());
        let err = TaskSet::from_json("{\"tasks\":[\n{\"name\":\"a\",\"period\":2,\"exec\":1,}]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn hyperperiod_of_rational_periods() {
        let ts = TaskSet::synchronous(&[(r(1), r(2)), (r(1), r(3)), (Rat::frac(1, 2), Rat::frac(5, 2))]).unwrap();
        assert_eq!(ts.hyperperiod(), r(30));
    }

    fn arb_raw() -> impl Strategy<Value = Vec<TaskSpec>> {
        prop::collection::vec((0i128..20, 1i128..20, 1i128..8, 1i128..4), 1..6).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(k, (o, p, q, c))| {
                    let period = Rat::frac(p + 1, q);
                    let exec = period * Rat::frac(c, 5);
                    TaskSpec::new(format!("t{k}"), Rat::frac(o, 4), period, exec)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn serialize_then_validate_is_identity(raw in arb_raw()) {
            let ts = TaskSet::validate(raw).unwrap();
            prop_assert_eq!(TaskSet::from_json(&ts.to_json()).unwrap(), ts);
        }

        #[test]
        fn rms_is_order_isomorphic_to_periods(raw in arb_raw()) {
            let ts = TaskSet::validate(raw).unwrap();
            let p = rms_priorities(&ts);
            let mut seen = p.ranks().to_vec();
            seen.sort();
            prop_assert_eq!(seen, (1..=ts.len()).collect::<Vec<_>>());
            for a in 0..ts.len() {
                for b in 0..ts.len() {
                    if ts.task(a).period < ts.task(b).period {
                        prop_assert!(p.is_higher(a, b));
                    }
                }
            }
        }
    }
}
