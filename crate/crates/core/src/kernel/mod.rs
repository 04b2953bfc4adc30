//! The Schur-product kernel `P(s1,s2) = P1^{-s1} ⋆ P2^{-s2}` of a pair of
//! Markov sources, its dominant eigen-structure and the kernel equation
//! `λ(s1,s2) = 1`.
//!
//! Kernel matrices are indexed `[from][to]`: entry `(b,a)` is
//! `P1(a|b)^{-s1} P2(a|b)^{-s2}` on the common support and zero elsewhere.
//! With this orientation the right eigenvector of a stochastic matrix is
//! the all-ones vector, and the word generating function is
//! `Σ_w P1(w)^{-s1} P2(w)^{-s2} = ⟨π(s1,s2)| (I − P(s1,s2))^{-1} |1⟩`.

mod solve;
mod structure;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg::{dominant_spectrum_sparse, dot, reduced_resolvent, SparseMatrix, Spectrum, C64};
use crate::textmodel::MarkovModel;

pub use solve::{kernel_s1, solve_kernel, Axis, KernelSolution, Periodicity, Regime};
pub use structure::{
    commensurability, gamma0_nilpotent, is_conjugate, nilpotency_index, rational_relatedness, Relatedness,
    DEFAULT_DENOMINATOR_CAP, DEFAULT_RELATEDNESS_TOL,
};

/// A transition present in both sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    /// `ln P1(to|from)`.
    pub l1: f64,
    /// `ln P2(to|from)`.
    pub l2: f64,
}

/// The pair of sources reduced to what the kernel needs.
#[derive(Debug, Clone)]
pub struct SchurKernel {
    n: usize,
    alphabet_len: usize,
    edges: Vec<Edge>,
    ln_pi1: Vec<f64>,
    ln_pi2: Vec<f64>,
    identical: bool,
    p1_contained: bool,
    p2_contained: bool,
    p1_uniform: bool,
}

/// `λ` and its partial derivatives up to second order at a real point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaDerivatives {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl SchurKernel {
    pub fn new(m1: &MarkovModel, m2: &MarkovModel) -> Result<Self> {
        if m1.alphabet() != m2.alphabet() || m1.order() != m2.order() {
            bail!(Input, "the two models must share alphabet and order");
        }
        let n = m1.num_states();
        let mut edges = Vec::new();
        let (mut p1_contained, mut p2_contained) = (true, true);
        for b in 0..n {
            for a in 0..n {
                let (p, q) = (m1.p(a, b), m2.p(a, b));
                match (p > 0.0, q > 0.0) {
                    (true, true) => edges.push(Edge { from: b as u32, to: a as u32, l1: p.ln(), l2: q.ln() }),
                    (true, false) => p1_contained = false,
                    (false, true) => p2_contained = false,
                    _ => {}
                }
            }
        }
        let ln_or_nan = |x: f64| if x > 0.0 { x.ln() } else { f64::NAN };
        let k = m1.alphabet().len();
        let uniform = 1.0 / k as f64;
        let p1_uniform = (0..n).all(|b| {
            (0..k).all(|s| (m1.p(m1.successor(b, s), b) - uniform).abs() <= 1e-12)
        });
        Ok(SchurKernel {
            n,
            alphabet_len: k,
            edges,
            ln_pi1: m1.stationary().iter().map(|&x| ln_or_nan(x)).collect(),
            ln_pi2: m2.stationary().iter().map(|&x| ln_or_nan(x)).collect(),
            identical: m1.transitions() == m2.transitions(),
            p1_contained,
            p2_contained,
            p1_uniform,
        })
    }

    /// Same kernel with the roles of the two sources exchanged.
    pub fn swapped(&self) -> Self {
        let mut k = self.clone();
        for e in &mut k.edges {
            core::mem::swap(&mut e.l1, &mut e.l2);
        }
        core::mem::swap(&mut k.ln_pi1, &mut k.ln_pi2);
        core::mem::swap(&mut k.p1_contained, &mut k.p2_contained);
        k.p1_uniform = false;
        k
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `P1` is the uniform memoryless source.
    pub fn p1_uniform(&self) -> bool {
        self.p1_uniform
    }

    /// The two transition matrices are equal.
    pub fn identical(&self) -> bool {
        self.identical
    }

    /// Both supports equal the common support, so `P(−1,0) = P1` and
    /// `P(0,−1) = P2`.
    pub fn full_common_support(&self) -> bool {
        self.p1_contained && self.p2_contained
    }

    /// `ln π1`, `ln π2` per state (NaN where the probability is zero).
    pub fn ln_stationary(&self) -> (&[f64], &[f64]) {
        (&self.ln_pi1, &self.ln_pi2)
    }

    fn build(&self, weight: impl Fn(&Edge) -> C64) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for e in &self.edges {
            rows[e.from as usize].push((e.to, weight(e)));
        }
        SparseMatrix::new(self.n, rows)
    }

    /// `P(s1,s2)`; entries outside the common support stay zero.
    pub fn eval_p(&self, s1: C64, s2: C64) -> SparseMatrix {
        self.build(|e| (-(s1 * e.l1) - s2 * e.l2).exp())
    }

    pub fn eval_p_real(&self, s1: f64, s2: f64) -> SparseMatrix {
        self.eval_p(C64::new(s1, 0.0), C64::new(s2, 0.0))
    }

    /// Entries scaled by `e^{-shift}` where `shift` is the largest real
    /// exponent, so that extreme `s` neither overflows nor underflows.
    fn eval_scaled(&self, s1: f64, s2: f64) -> (SparseMatrix, f64) {
        let shift = self.edges.iter().map(|e| -s1 * e.l1 - s2 * e.l2).fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        (self.build(|e| C64::new((-s1 * e.l1 - s2 * e.l2 - shift).exp(), 0.0)), shift)
    }

    pub fn spectrum(&self, s1: C64, s2: C64) -> Result<Spectrum> {
        if self.edges.is_empty() {
            bail!(Numeric, "the two sources share no transition");
        }
        dominant_spectrum_sparse(&self.eval_p(s1, s2))
    }

    /// `ln λ(s1,s2)` at a real point, robust to large `|s|`.
    pub fn ln_lambda(&self, s1: f64, s2: f64) -> Result<f64> {
        if self.edges.is_empty() {
            bail!(Numeric, "the two sources share no transition");
        }
        let (m, shift) = self.eval_scaled(s1, s2);
        let lam = dominant_spectrum_sparse(&m)?.lambda.re;
        if !(lam > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(shift + lam.ln())
    }

    /// `(ln λ, ∂₁ ln λ)` at a real point, from one eigen-solve.
    pub fn ln_lambda_d1(&self, s1: f64, s2: f64) -> Result<(f64, f64)> {
        if self.edges.is_empty() {
            bail!(Numeric, "the two sources share no transition");
        }
        let (m, shift) = self.eval_scaled(s1, s2);
        let spec = dominant_spectrum_sparse(&m)?;
        let lam = spec.lambda.re;
        if !(lam > 0.0) {
            return Ok((f64::NEG_INFINITY, f64::NAN));
        }
        let d1 = self.build(|e| C64::new(-e.l1 * (-s1 * e.l1 - s2 * e.l2 - shift).exp(), 0.0));
        Ok((shift + lam.ln(), dot(&spec.zeta, &d1.mul_vec(&spec.u)).re / lam))
    }

    pub fn lambda(&self, s1: f64, s2: f64) -> Result<f64> {
        Ok(self.ln_lambda(s1, s2)?.exp())
    }

    /// Analytic first and second partials of `λ` by eigenvalue perturbation:
    /// `λ_i = ζᵀP_i u` and `λ_ij = ζᵀP_ij u + ζᵀP_i S P_j u + ζᵀP_j S P_i u`,
    /// with `S` the reduced resolvent.
    pub fn lambda_derivatives(&self, s1: f64, s2: f64) -> Result<LambdaDerivatives> {
        let p = self.eval_p_real(s1, s2);
        let spec = dominant_spectrum_sparse(&p)?;
        if spec.degenerate {
            bail!(Numeric, "degenerate dominant eigenvalue at ({}, {})", s1, s2);
        }
        let weighted = |f: &dyn Fn(&Edge) -> f64| {
            self.build(|e| {
                let v = (-s1 * e.l1 - s2 * e.l2).exp();
                C64::new(f(e) * v, 0.0)
            })
        };
        let p1 = weighted(&|e| -e.l1);
        let p2 = weighted(&|e| -e.l2);
        let p11 = weighted(&|e| e.l1 * e.l1);
        let p12 = weighted(&|e| e.l1 * e.l2);
        let p22 = weighted(&|e| e.l2 * e.l2);
        let u = &spec.u;
        let z = &spec.zeta;
        let p1u = p1.mul_vec(u);
        let p2u = p2.mul_vec(u);
        let x1 = reduced_resolvent(&p, &spec, &p1u)?;
        let x2 = reduced_resolvent(&p, &spec, &p2u)?;
        let form = |m: &SparseMatrix, v: &[C64]| dot(z, &m.mul_vec(v)).re;
        Ok(LambdaDerivatives {
            lambda: spec.lambda.re,
            d1: dot(z, &p1u).re,
            d2: dot(z, &p2u).re,
            d11: form(&p11, u) + 2.0 * form(&p1, &x1),
            d12: form(&p12, u) + form(&p1, &x2) + form(&p2, &x1),
            d22: form(&p22, u) + 2.0 * form(&p2, &x2),
        })
    }

    /// `(λ, f, g)` at a complex point, where `f = ⟨π(s1,s2)|u⟩`,
    /// `g = ⟨ζ|1⟩` and `π(s1,s2)_a = π1(a)^{-s1} π2(a)^{-s2}`.
    /// The product `f·g` does not depend on eigenvector scaling.
    pub fn lambda_f_g(&self, s1: C64, s2: C64) -> Result<(C64, C64, C64)> {
        let spec = self.spectrum(s1, s2)?;
        let f = self.pi_vector(s1, s2).iter().zip(&spec.u).map(|(p, u)| p * u).sum();
        let g = spec.zeta.iter().sum();
        Ok((spec.lambda, f, g))
    }

    /// `π(s1,s2)`, zero where either stationary probability vanishes.
    pub fn pi_vector(&self, s1: C64, s2: C64) -> Vec<C64> {
        self.ln_pi1
            .iter()
            .zip(&self.ln_pi2)
            .map(|(&a, &b)| if a.is_nan() || b.is_nan() { C64::new(0.0, 0.0) } else { (-(s1 * a) - s2 * b).exp() })
            .collect()
    }

    /// Single-source vector `π2(a)^{-s}` used by the uniform-source formulas.
    pub fn pi2_vector(&self, s: C64) -> Vec<C64> {
        self.ln_pi2
            .iter()
            .map(|&b| if b.is_nan() { C64::new(0.0, 0.0) } else { (-(s * b)).exp() })
            .collect()
    }

    /// Right eigenvector of `P(s1,s2)` together with the spectrum.
    pub fn spectrum_real(&self, s1: f64, s2: f64) -> Result<Spectrum> {
        self.spectrum(Complex::new(s1, 0.0), Complex::new(s2, 0.0))
    }
}

/// Central difference with one Richardson step.
pub(crate) fn richardson(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let (a, b) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * b - a) / 3.0)
}
