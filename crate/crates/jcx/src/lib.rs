//! Command-line companion of `jcx-core`: model files, tokenizers,
//! seeded Monte Carlo, complexity curves and the `jcx` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curve;
pub mod discriminate;
pub mod error;
pub mod model_io;
pub mod montecarlo;
pub mod seeds;
pub mod tokenize;

pub use error::{Error, Result};

/// Shortest round-trip decimal, switching to exponent form for very small
/// or large magnitudes.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
