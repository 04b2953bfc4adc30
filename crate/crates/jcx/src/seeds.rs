//! Seed fan-out: every (n, trial) cell gets its own pair of seeds, derived
//! from the master seed alone, so results never depend on scheduling.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

fn splitmix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

/// Seeds for the two strings of trial `trial` at length `n`.
pub fn trial_seeds(master: u64, n: u64, trial: u64) -> (u64, u64) {
    let mut g = SplitMix64::seed_from_u64(splitmix(splitmix(master) ^ n) ^ splitmix(trial.wrapping_add(1) << 1));
    (g.next_u64(), g.next_u64())
}
