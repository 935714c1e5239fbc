//! Utilization and the least-upper-bound formulas for RMS.
//!
//! Rational quantities stay exact. The bound `N(2^{1/N} - 1)` and the
//! minimizer of the two-task surface are irrational and computed in `f64`;
//! a utilization within [`LL_TOLERANCE`] of the bound is reported as
//! inconclusive and the exact test decides.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::rat::Rat;
use crate::worstcase::n_task_wc_test;

pub const LL_TOLERANCE: f64 = 1e-9;

pub fn utilization(ts: &TaskSet) -> Rat {
    ts.tasks().iter().map(|t| t.utilization()).sum()
}

/// `n * (2^(1/n) - 1)`, evaluated as `n * expm1(ln 2 / n)` to avoid the
/// cancellation in `2^(1/n) - 1`.
pub fn ll_bound(n: u32) -> f64 {
    assert!(n >= 1, "bound needs at least one task");
    let n = f64::from(n);
    n * (std::f64::consts::LN_2 / n).exp_m1()
}

/// Largest utilization reachable by raising `C2` until the lower-priority
/// task exactly fills its period, as a function of `C1`, for periods
/// `T1 <= T2`.
pub fn ubar_two(c1: Rat, t1: Rat, t2: Rat) -> Result<Rat> {
    if !(Rat::ZERO <= c1 && c1 < t1 && t1 <= t2) {
        return Err(Error::DomainViolation(format!("need 0 <= C1 < T1 <= T2, got C1={c1} T1={t1} T2={t2}")));
    }
    let ratio = t2 / t1;
    let tail = t1 * ratio.fract();
    if c1 <= tail {
        Ok(Rat::ONE + c1 * (Rat::ONE / t1 - Rat::int(ratio.ceil()) / t2))
    } else {
        let whole = Rat::int(ratio.floor());
        Ok(t1 / t2 * whole + c1 * (Rat::ONE / t1 - whole / t2))
    }
}

/// Value of [`ubar_two`] at the junction `C1 = T1 * {T2/T1}`.
pub fn ubar_junction(t1: Rat, t2: Rat) -> Rat {
    let ratio = t2 / t1;
    Rat::ONE - t1 / t2 * (Rat::int(ratio.ceil()) - ratio) * (ratio - Rat::int(ratio.floor()))
}

/// The junction value in terms of `I = floor(T2/T1)` and `f = {T2/T1}`.
pub fn ubar_if(i: u32, f: f64) -> f64 {
    let i = f64::from(i);
    1.0 - f * (1.0 - f) / (i + f)
}

/// `d/df` of [`ubar_if`]: `(f^2 + 2 I f - I) / (I + f)^2`.
pub fn ubar_if_derivative(i: u32, f: f64) -> f64 {
    let i = f64::from(i);
    (f * f + 2.0 * i * f - i) / ((i + f) * (i + f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundMinimum {
    pub i: u32,
    pub f_star: f64,
    pub u_star: f64,
}

/// Minimizes `ubar_if(I, f)` over integers `1 <= I <= 64` and `f in [0, 1)`.
///
/// For each `I` the derivative numerator `f^2 + 2 I f - I` is negative at 0
/// and positive at 1, so the unique stationary point is found by bisection.
pub fn minimize_ubar() -> BoundMinimum {
    (1..=64)
        .map(|i| {
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let g = |f: f64| f * f + 2.0 * f64::from(i) * f - f64::from(i);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let f = 0.5 * (lo + hi);
            BoundMinimum { i, f_star: f, u_star: ubar_if(i, f) }
        })
        .min_by(|a, b| a.u_star.total_cmp(&b.u_star))
        .expect("nonempty range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LlOutcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilizationReport {
    pub per_task: Vec<Rat>,
    pub total: Rat,
    pub ll_bound: f64,
    pub ll: LlOutcome,
    pub passes_ll: bool,
    pub passes_exact: bool,
}

pub fn utilization_report(ts: &TaskSet) -> UtilizationReport {
    let per_task: Vec<Rat> = ts.tasks().iter().map(|t| t.utilization()).collect();
    let total: Rat = per_task.iter().sum();
    let bound = ll_bound(ts.len() as u32);
    let u = total.to_f64();
    let ll = if (u - bound).abs() < LL_TOLERANCE {
        LlOutcome::Inconclusive
    } else if u < bound {
        LlOutcome::Pass
    } else {
        LlOutcome::Fail
    };
    UtilizationReport {
        per_task,
        total,
        ll_bound: bound,
        ll,
        passes_ll: ll == LlOutcome::Pass,
        passes_exact: n_task_wc_test(ts).all_schedulable(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128) -> Rat {
        Rat::int(n)
    }

    fn q(n: i128, d: i128) -> Rat {
        Rat::frac(n, d)
    }

    #[test]
    fn utilization_examples() {
        let ts = TaskSet::synchronous(&[(r(1), r(2)), (r(1), r(5))]).unwrap();
        assert_eq!(utilization(&ts), q(7, 10));
        let ts = TaskSet::synchronous(&[(r(1), r(3)), (r(1), r(4)), (r(1), r(5))]).unwrap();
        assert_eq!(utilization(&ts), q(47, 60));
        let ts = TaskSet::synchronous(&[(r(1), r(2))]).unwrap();
        assert_eq!(utilization(&ts), q(1, 2));
    }

    #[test]
    fn ll_bound_values() {
        assert_eq!(ll_bound(1), 1.0);
        assert!((ll_bound(2) - 0.828427124746).abs() < 1e-12);
        assert!((ll_bound(3) - 0.779763149684).abs() < 1e-12);
    }

    #[test]
    fn ubar_two_junction() {
        // T2/T1 = 3/2: I = 1, f = 1/2
        assert_eq!(ubar_two(q(1, 2), r(1), q(3, 2)).unwrap(), q(5, 6));
        assert_eq!(ubar_junction(r(1), q(3, 2)), q(5, 6));
        assert_eq!(ubar_two(r(0), r(1), q(3, 2)).unwrap(), r(1));
        // T2 a multiple of T1: junction at C1 = 0
        assert_eq!(ubar_junction(r(2), r(6)), r(1));
        assert_eq!(ubar_two(r(0), r(2), r(6)).unwrap(), r(1));
        assert!(ubar_two(r(1), r(1), r(2)).is_err());
        assert!(ubar_two(q(1, 2), r(2), r(1)).is_err());
    }

    #[test]
    fn ubar_two_branches_meet_at_junction() {
        for (t1, t2) in [(r(3), r(7)), (r(2), q(9, 2)), (q(5, 3), r(4))] {
            let c = t1 * (t2 / t1).fract();
            let eps = q(1, 1_000_000);
            let at = ubar_two(c, t1, t2).unwrap();
            let above = ubar_two(c + eps, t1, t2).unwrap();
            assert_eq!(at, ubar_junction(t1, t2));
            assert!((above - at).abs() < q(1, 1000));
        }
    }

    #[test]
    fn minimizer() {
        let m = minimize_ubar();
        assert_eq!(m.i, 1);
        assert!((m.f_star - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((m.u_star - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(ubar_if(1, 0.0), 1.0);
        let f = 2f64.sqrt() - 1.0;
        assert!(ubar_if(2, f) > ubar_if(1, f));
    }

    #[test]
    fn report_flags() {
        let ts = TaskSet::synchronous(&[(r(1), r(2)), (r(1), r(5))]).unwrap();
        let rep = utilization_report(&ts);
        assert!(rep.passes_ll && rep.passes_exact);
        let ts = TaskSet::synchronous(&[(r(1), r(2)), (r(1), r(3)), (r(1), r(6))]).unwrap();
        let rep = utilization_report(&ts);
        assert_eq!(rep.ll, LlOutcome::Fail);
        assert!(rep.passes_exact);
    }
}
