//! Joint string complexity of texts and of Markov sources.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`textmodel`] — order-r Markov sources: estimation, stationary law,
//!   entropy rate, sampling.
//! * [`factorindex`] — suffix automata; exact `|I(X)|`, `J(X,Y)` and the
//!   discriminant `d(X,Y)`.
//! * [`prefixcx`] — the expected joint prefix complexity `C_{n,m}` by the
//!   discrete recurrence and by a pruned sum over the word trie.
//! * [`kernel`] — the Schur-product matrix `P(s1,s2)`, its dominant
//!   eigen-structure, the kernel equation `λ(s1,s2) = 1` and regime
//!   classification.
//! * [`asymptotics`] — Γ/ψ/ψ′ and the leading-order constants predicting
//!   `C_{n,n}` in every regime.
//!
//! Matrices coming from a [`textmodel::MarkovModel`] are column-stochastic
//! (`P[a][b] = P(a|b)`). Matrices built by the kernel are indexed
//! `[from][to]` so that right eigenvectors pair with the all-ones vector.
//! All logarithms are natural unless a name says otherwise.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is the NaN-rejecting form, used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod factorindex;
pub mod kernel;
pub mod linalg;
pub mod prefixcx;
pub mod textmodel;

mod cfrac;
mod util;

pub use error::{Error, Result};
