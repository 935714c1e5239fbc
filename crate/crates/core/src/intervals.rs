//! Finite unions of rational intervals with open or closed endpoints.

use std::cmp::Ordering;
use std::fmt;

use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::rat::Rat;

/// One interval; a single point is `[x, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: Rat,
    pub lo_closed: bool,
    pub hi: Rat,
    pub hi_closed: bool,
}

impl Span {
    pub fn closed(lo: Rat, hi: Rat) -> Span {
        Span { lo, lo_closed: true, hi, hi_closed: true }
    }

    pub fn open(lo: Rat, hi: Rat) -> Span {
        Span { lo, lo_closed: false, hi, hi_closed: false }
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: Rat, hi: Rat) -> Span {
        Span { lo, lo_closed: false, hi, hi_closed: true }
    }

    pub fn point(x: Rat) -> Span {
        Span::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    pub fn contains(&self, x: Rat) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// True when `self` and `next` (with `next.lo >= self.lo`) overlap or
    /// touch without a gap.
    fn joins(&self, next: &Span) -> bool {
        match self.hi.cmp(&next.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.hi_closed || next.lo_closed,
            Ordering::Less => false,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

// Wire form: [lo, lo_closed, hi, hi_closed]
impl Serialize for Span {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(4)?;
        t.serialize_element(&self.lo)?;
        t.serialize_element(&self.lo_closed)?;
        t.serialize_element(&self.hi)?;
        t.serialize_element(&self.hi_closed)?;
        t.end()
    }
}

/// Sorted, pairwise disjoint, nonempty spans.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct IntervalSet {
    spans: Vec<Span>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet::default()
    }

    pub fn new(spans: impl IntoIterator<Item = Span>) -> IntervalSet {
        let mut v: Vec<Span> = spans.into_iter().filter(|s| !s.is_empty()).collect();
        // closed lower ends first so merging keeps the widest bound
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Span> = Vec::with_capacity(v.len());
        for s in v {
            match out.last_mut() {
                Some(last) if last.joins(&s) => match s.hi.cmp(&last.hi) {
                    Ordering::Greater => {
                        last.hi = s.hi;
                        last.hi_closed = s.hi_closed;
                    }
                    Ordering::Equal => last.hi_closed |= s.hi_closed,
                    Ordering::Less => {}
                },
                _ => out.push(s),
            }
        }
        IntervalSet { spans: out }
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn contains(&self, x: Rat) -> bool {
        self.spans.iter().any(|s| s.contains(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.spans.iter().chain(&other.spans).copied())
    }

    /// All finite endpoints, useful for injecting boundary points into grids.
    pub fn endpoints(&self) -> Vec<Rat> {
        self.spans.iter().flat_map(|s| [s.lo, s.hi]).collect()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spans.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.spans.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}
