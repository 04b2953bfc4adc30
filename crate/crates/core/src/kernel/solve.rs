//! Solving `λ(s1,s2) = 1` and classifying the pair of sources.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use super::structure::{commensurability, effective_conjugacy, first_period, gamma0_nilpotent, nilpotency_index};
use super::SchurKernel;
use crate::error::{bail, Result};
use crate::linalg::{dominant_spectrum_sparse, dot, SparseMatrix, C64};

/// Lower end of the `s2` search range, `−1 + δ`.
pub const S2_MIN: f64 = -1.0 + 1e-6;
/// Upper end of the `s2` search range.
pub const S2_MAX: f64 = 40.0;
const BISECT_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 1e-10;
const PIN_TOL: f64 = 1e-6;
const S1_LIMIT: f64 = 1e4;

/// Asymptotic regime of `C_{n,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Identical (or conjugate full-support) sources: linear growth.
    SameSource,
    /// The common support has no cycle: `C_{n,n}` tends to a constant.
    Nilpotent,
    /// `P(−1,0)` and `P(0,−1)` are conjugate: the kernel is a line.
    Conjugate,
    /// `c2 > 0`: growth `n^{−c0}` with `λ(c0,0) = 1`.
    BoundaryC2Pos,
    /// Mirror image of [`Regime::BoundaryC2Pos`], with `λ(0,c0) = 1`.
    BoundaryC1Pos,
    /// Interior saddle `(c1,c2)`: growth `n^κ/√(log n)`.
    InteriorSaddle,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SameSource => "SameSource",
            Regime::Nilpotent => "Nilpotent",
            Regime::Conjugate => "Conjugate",
            Regime::BoundaryC2Pos => "BoundaryC2Pos",
            Regime::BoundaryC1Pos => "BoundaryC1Pos",
            Regime::InteriorSaddle => "InteriorSaddle",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S1,
    S2,
}

/// Shape of the set of points of `∂K` sharing the real part `(c1,c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Periodicity {
    Punctual,
    /// Points `c + 2πiℓω` along one coordinate; `period = 2πω`.
    Linear { axis: Axis, period: f64 },
    Lattice { period1: f64, period2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSolution {
    pub regime: Regime,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub kappa: Option<f64>,
    /// Boundary regimes: `λ(c0,0) = 1` (or `λ(0,c0) = 1` when mirrored).
    pub c0: Option<f64>,
    pub periodicity: Option<Periodicity>,
    pub nilpotency_index: Option<usize>,
    pub gamma0: Option<f64>,
    /// Conjugacy witness for `P(0,−1) = D P(−1,0) D^{-1}`.
    pub witness: Option<Vec<f64>>,
    /// The witness is constant on each component (`x ≡ 1`).
    pub unit_witness: bool,
}

impl KernelSolution {
    fn new(regime: Regime) -> Self {
        KernelSolution {
            regime,
            c1: None,
            c2: None,
            kappa: None,
            c0: None,
            periodicity: None,
            nilpotency_index: None,
            gamma0: None,
            witness: None,
            unit_witness: false,
        }
    }

    /// Growth exponent of `C_{n,n}`: 1, 0, `κ` or `−c0`.
    pub fn exponent(&self) -> f64 {
        match self.regime {
            Regime::SameSource => 1.0,
            Regime::Nilpotent => 0.0,
            Regime::Conjugate | Regime::InteriorSaddle => self.kappa.unwrap_or(f64::NAN),
            Regime::BoundaryC2Pos | Regime::BoundaryC1Pos => -self.c0.unwrap_or(f64::NAN),
        }
    }
}

/// `s1` with `λ(s1,s2) = 1`: bracketing, then safeguarded Newton on
/// `ln λ`, which is convex and increasing in `s1` (every entry `P1^{-s1}` is).
pub fn kernel_s1(kernel: &SchurKernel, s2: f64) -> Result<f64> {
    let f = |s1: f64| kernel.ln_lambda(s1, s2);
    let (mut a, mut b) = (-1.0, 0.0);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    let mut width = 1.0;
    while fa >= 0.0 {
        b = a;
        fb = fa;
        a -= width;
        width *= 2.0;
        if a < -S1_LIMIT {
            bail!(Numeric, "no s1 with λ(s1, {}) = 1 below {}: λ stays above 1", s2, -S1_LIMIT);
        }
        fa = f(a)?;
    }
    width = 1.0;
    while fb < 0.0 {
        a = b;
        fa = fb;
        b += width;
        width *= 2.0;
        if b > S1_LIMIT {
            bail!(Numeric, "no s1 with λ(s1, {}) = 1 above {}: λ stays below 1", s2, S1_LIMIT);
        }
        fb = f(b)?;
    }
    let _ = (fa, fb);
    // safeguarded Newton: ln λ is convex and increasing in s1
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let tol = BISECT_TOL * (1.0 + x.abs());
        if b - a <= tol {
            break;
        }
        let (fx, dx) = kernel.ln_lambda_d1(x, s2)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - fx / dx;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol {
            break;
        }
    }
    Ok(x)
}

/// `g(s2) = L(s2) − s2 = −s1(s2) − s2` along the kernel.
fn g(kernel: &SchurKernel, s2: f64) -> Result<f64> {
    Ok(-kernel_s1(kernel, s2)? - s2)
}

/// `(∂1λ, ∂2λ)` up to a common positive factor (entries rescaled against
/// overflow).
fn scaled_gradient(kernel: &SchurKernel, s1: f64, s2: f64) -> Result<(f64, f64)> {
    let shift = kernel.edges().iter().map(|e| -s1 * e.l1 - s2 * e.l2).fold(f64::NEG_INFINITY, f64::max);
    let w = |e: &super::Edge| (-s1 * e.l1 - s2 * e.l2 - shift).exp();
    let mk = |f: &dyn Fn(&super::Edge) -> f64| {
        let mut rows = alloc::vec![Vec::new(); kernel.num_states()];
        for e in kernel.edges() {
            rows[e.from as usize].push((e.to, C64::new(f(e), 0.0)));
        }
        SparseMatrix::new(kernel.num_states(), rows)
    };
    let m = mk(&|e| w(e));
    let spec = dominant_spectrum_sparse(&m)?;
    let d1 = dot(&spec.zeta, &mk(&|e| -e.l1 * w(e)).mul_vec(&spec.u)).re;
    let d2 = dot(&spec.zeta, &mk(&|e| -e.l2 * w(e)).mul_vec(&spec.u)).re;
    Ok((d1, d2))
}

/// Sign-carrying proxy for `g′(s2) = ∂2λ/∂1λ − 1` on the kernel.
fn g_slope(kernel: &SchurKernel, s2: f64) -> Result<f64> {
    let s1 = kernel_s1(kernel, s2)?;
    let (d1, d2) = scaled_gradient(kernel, s1, s2)?;
    Ok(d2 / d1 - 1.0)
}

fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > GOLDEN_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimiser of the convex `g` on `[S2_MIN, S2_MAX]`: march right with
/// doubling steps until `g` rises, then golden section on the bracket. Far
/// beyond the minimiser the entries span hundreds of orders of magnitude
/// and eigenvalues lose accuracy, so that region is never visited.
fn convex_min(kernel: &SchurKernel) -> Result<f64> {
    let (mut lo, mut mid) = (S2_MIN, S2_MIN);
    let mut fmid = g(kernel, mid)?;
    let mut step = 0.25;
    loop {
        let x = (mid + step).min(S2_MAX);
        let fx = g(kernel, x)?;
        if fx > fmid {
            return golden_min(|s2| g(kernel, s2), lo, x);
        }
        if x >= S2_MAX {
            return Ok(S2_MAX);
        }
        lo = mid;
        mid = x;
        fmid = fx;
        step *= 2.0;
    }
}

/// Refines the minimiser of the convex `g` by bisection on the sign of
/// `g′`, which unlike `g` itself is not flat at the minimum.
fn polish(kernel: &SchurKernel, x: f64) -> Result<f64> {
    let mut h = 1e-4;
    let (mut a, mut b);
    loop {
        a = (x - h).max(S2_MIN);
        b = (x + h).min(S2_MAX);
        if g_slope(kernel, a)? <= 0.0 && g_slope(kernel, b)? >= 0.0 {
            break;
        }
        h *= 4.0;
        if h > S2_MAX {
            // no sign change: keep the golden-section estimate
            return Ok(x);
        }
    }
    for _ in 0..100 {
        if b - a <= 1e-13 {
            break;
        }
        let mid = 0.5 * (a + b);
        if g_slope(kernel, mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Classifies the pair and locates the extremal kernel point.
///
/// Order of tests: nilpotent common support; conjugate `P(−1,0)` and
/// `P(0,−1)` (same-source when nothing lies outside the common support);
/// otherwise minimisation of `−s1−s2` over the kernel parametrised by
/// `s2 ∈ [S2_MIN, S2_MAX]`.
pub fn solve_kernel(kernel: &SchurKernel) -> Result<KernelSolution> {
    if let Some(k) = nilpotency_index(kernel) {
        let mut sol = KernelSolution::new(Regime::Nilpotent);
        sol.nilpotency_index = Some(k);
        sol.gamma0 = Some(gamma0_nilpotent(kernel)?);
        return Ok(sol);
    }
    if let Some(x) = effective_conjugacy(kernel) {
        let unit = x.iter().all(|&v| (v - 1.0).abs() <= 1e-9);
        if kernel.full_common_support() {
            let mut sol = KernelSolution::new(Regime::SameSource);
            sol.kappa = Some(1.0);
            sol.periodicity = Some(match first_period(kernel) {
                Some(p) => Periodicity::Linear { axis: Axis::S1, period: p },
                None => Periodicity::Punctual,
            });
            sol.witness = Some(x);
            sol.unit_witness = unit;
            return Ok(sol);
        }
        let mut sol = KernelSolution::new(Regime::Conjugate);
        sol.kappa = Some(-kernel_s1(kernel, 0.0)?);
        sol.witness = Some(x);
        sol.unit_witness = unit;
        return Ok(sol);
    }

    let xmin = convex_min(kernel)?;
    if xmin >= S2_MAX - PIN_TOL {
        return boundary(kernel, Regime::BoundaryC2Pos);
    }
    if xmin <= S2_MIN + PIN_TOL {
        return boundary(kernel, Regime::BoundaryC1Pos);
    }
    let c2 = polish(kernel, xmin)?;
    let c1 = kernel_s1(kernel, c2)?;
    if c2 > 0.0 {
        return boundary(kernel, Regime::BoundaryC2Pos);
    }
    if c1 > 0.0 {
        return boundary(kernel, Regime::BoundaryC1Pos);
    }
    let mut sol = KernelSolution::new(Regime::InteriorSaddle);
    sol.c1 = Some(c1);
    sol.c2 = Some(c2);
    sol.kappa = Some(-c1 - c2);
    sol.periodicity = Some(commensurability(kernel));
    Ok(sol)
}

fn boundary(kernel: &SchurKernel, regime: Regime) -> Result<KernelSolution> {
    let c0 = match regime {
        Regime::BoundaryC2Pos => kernel_s1(kernel, 0.0)?,
        _ => kernel_s1(&kernel.swapped(), 0.0)?,
    };
    let mut sol = KernelSolution::new(regime);
    sol.c0 = Some(c0);
    Ok(sol)
}
