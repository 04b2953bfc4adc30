//! Monte Carlo estimates of `J_{n,n}` from pairs of generated strings.

use jcx_core::factorindex::joint_complexity;
use jcx_core::textmodel::{generate, MarkovModel};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeds::trial_seeds;

#[derive(Debug, Clone, PartialEq)]
pub struct McPoint {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean (0 for a single trial).
    pub stderr: f64,
    /// `j_excl` per trial, in trial order.
    pub samples: Vec<u64>,
}

pub(crate) fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.first().is_some_and(|&n| n == 0) {
        return Err(Error::Usage("n-grid values must be positive".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("n-grid must be strictly increasing".into()));
    }
    Ok(())
}

pub(crate) fn check_pair(m1: &MarkovModel, m2: &MarkovModel) -> Result<()> {
    if m1.alphabet() != m2.alphabet() {
        return Err(Error::Usage("the two models must share the same alphabet, in the same order".into()));
    }
    Ok(())
}

/// Exact `j_excl` of independent strings `X ~ m1`, `Y ~ m2` of length `n`,
/// averaged over `trials`. Identical output for any thread count.
pub fn monte_carlo(m1: &MarkovModel, m2: &MarkovModel, n_grid: &[usize], trials: usize, seed: u64) -> Result<Vec<McPoint>> {
    check_pair(m1, m2)?;
    check_grid(n_grid)?;
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    Ok(n_grid
        .iter()
        .map(|&n| {
            let samples: Vec<u64> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let (sx, sy) = trial_seeds(seed, n as u64, t);
                    joint_complexity(&generate(m1, n, sx), &generate(m2, n, sy)).j_excl
                })
                .collect();
            summarize(n, samples)
        })
        .collect())
}

fn summarize(n: usize, samples: Vec<u64>) -> McPoint {
    let k = samples.len() as f64;
    let mean = samples.iter().map(|&j| j as f64).sum::<f64>() / k;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|&j| (j as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    McPoint { n, mean, stderr, samples }
}
