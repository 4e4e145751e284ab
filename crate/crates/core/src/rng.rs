//! Splittable random streams.
//!
//! Every unit of Monte Carlo work owns a ChaCha stream addressed by
//! `(master seed, stream index)`, so results never depend on which worker
//! ran which trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Stream index for trial `trial` of sweep point `point`.
pub fn trial_index(point: usize, trial: usize) -> u64 {
    ((point as u64) << 40) | trial as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_address_same_stream() {
        let (mut a, mut b) = (stream(7, 3), stream(7, 3));
        for _ in 0..8 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_index_different_stream() {
        assert_ne!(stream(7, 3).next_u64(), stream(7, 4).next_u64());
        assert_ne!(stream(7, 3).next_u64(), stream(8, 3).next_u64());
    }

    #[test]
    fn trial_index_separates_points() {
        assert_ne!(trial_index(0, 1), trial_index(1, 1));
        assert_eq!(trial_index(0, 5), 5);
    }
}
