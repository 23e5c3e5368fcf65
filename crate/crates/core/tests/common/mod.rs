#![allow(dead_code)]

use padic_dpp::{Ball, BallSet, PAdic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0xC0FFEE;

/// A random union of up to `max_balls` balls with radii between `p^-5` and
/// `p` and centers in `B(0, p^2)`.
pub fn random_set(rng: &mut impl Rng, p: u32, max_balls: usize) -> BallSet {
    let count = rng.random_range(1..=max_balls);
    let balls = (0..count)
        .map(|_| {
            let k: i64 = rng.random_range(-5..=1);
            let width = (2 - k) as usize;
            let digits: Vec<u32> = (0..width).map(|_| rng.random_range(0..p)).collect();
            Ball::new(PAdic::finite(p, -2, &digits, -k).unwrap(), k).unwrap()
        })
        .collect();
    BallSet::canonicalize(p, balls).unwrap()
}

/// The fixed corpus of 100 sets over `p ∈ {2, 3}` used by the acceptance run.
pub fn corpus() -> Vec<BallSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..100)
        .map(|i| {
            let p = if i % 2 == 0 { 2 } else { 3 };
            random_set(&mut rng, p, 8)
        })
        .collect()
}

pub fn worked() -> BallSet {
    BallSet::from_literals(2, &[("0", -1), ("1", -2)]).unwrap()
}

/// `p^n Z_p` as a one-ball set.
pub fn lattice(p: u32, n: i64) -> BallSet {
    BallSet::canonicalize(p, vec![Ball::centered(p, -n)]).unwrap()
}
