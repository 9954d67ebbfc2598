//! Seeded randomness. Every task draws from its own stream derived from the
//! master seed and a task index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TaskRng = ChaCha8Rng;

pub fn task_rng(seed: u64, task: u64) -> TaskRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Stable task ids for the different consumers of one master seed.
pub mod stream {
    pub const BASIS_POINTS: u64 = 1;
    pub const BASIS_CANDIDATES: u64 = 2;
    pub const VARIETY_POINTS: u64 = 3;
    pub const FRESH_POINTS: u64 = 4;
    pub const QUOTIENT_POINTS: u64 = 5;
    pub const PRIMES: u64 = 6;
    pub const GENERIC_CHECK: u64 = 7;
    pub const SAMPLE: u64 = 8;
    pub const LIFT: u64 = 9;
    pub const INTERPOLATION: u64 = 10;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, task: u64) -> Vec<u32> {
        let mut rng = task_rng(seed, task);
        (0..4).map(|_| rng.gen()).collect()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(draws(7, 1), draws(7, 1));
        assert_ne!(draws(7, 1), draws(7, 2));
        assert_ne!(draws(7, 1), draws(8, 1));
    }
}
