//! Seeded random generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigmoment::{Rat, TaskSet, TaskSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i128) -> Rat {
    Rat::int(n)
}

pub fn q(n: i128, d: i128) -> Rat {
    Rat::frac(n, d)
}

/// Uniform `k / den` with `lo < k / den < hi`.
pub fn between(rng: &mut ChaCha8Rng, lo: Rat, hi: Rat, den: i128) -> Rat {
    let kmin = (lo * Rat::int(den)).floor() + 1;
    let kmax = (hi * Rat::int(den)).ceil() - 1;
    assert!(kmin <= kmax, "no multiple of 1/{den} strictly inside ({lo}, {hi})");
    q(rng.gen_range(kmin..=kmax), den)
}

pub fn small_den(rng: &mut ChaCha8Rng) -> i128 {
    *[1, 2, 3, 4].choose(rng).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Gen {
    pub max_period: i128,
    /// period denominators are drawn from 1..=period_den
    pub period_den: i128,
    pub exec_den: i128,
    pub offsets: bool,
    /// reject sets whose utilization exceeds this
    pub max_util: Option<Rat>,
}

impl Default for Gen {
    fn default() -> Gen {
        Gen { max_period: 8, period_den: 1, exec_den: 4, offsets: false, max_util: None }
    }
}

pub fn task_set(rng: &mut ChaCha8Rng, n: usize, g: Gen) -> TaskSet {
    loop {
        let tasks: Vec<TaskSpec> = (0..n)
            .map(|k| {
                let pd = rng.gen_range(1..=g.period_den);
                let period = q(rng.gen_range(pd..=g.max_period * pd), pd);
                let exec = between(rng, Rat::ZERO, period, g.exec_den);
                let offset = if g.offsets { between(rng, -Rat::ONE / Rat::int(4), period, 4).max(Rat::ZERO) } else { Rat::ZERO };
                TaskSpec::new(format!("t{}", k + 1), offset, period, exec)
            })
            .collect();
        let u: Rat = tasks.iter().map(|t| t.utilization()).sum();
        if g.max_util.map_or(true, |cap| u <= cap) {
            return TaskSet::validate(tasks).expect("generated set is valid");
        }
    }
}
