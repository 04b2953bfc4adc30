//! Leading-order predictions for `C_{n,n}` in every kernel regime.
//!
//! All logarithms of `n` are natural; `α₂` and `β₂` are expressed to match.

mod special;

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::kernel::{richardson, Axis, KernelSolution, Periodicity, Regime, SchurKernel};
use crate::linalg::C64;
use crate::textmodel::MarkovModel;

pub use special::{digamma, gamma_c, gamma_fn, trigamma};

/// Step for numerical derivatives of eigenvector functionals.
const FD_STEP: f64 = 1e-4;
/// Step for second differences (larger, to keep rounding noise down).
const FD2_STEP: f64 = 1e-3;
/// Tolerance of the saddle condition `∂₁H = ∂₂H`.
const SADDLE_TOL: f64 = 1e-6;

/// Regime-specific constants of the leading term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constants {
    /// `2n ln 2 / h`.
    SameSource { entropy: f64 },
    Nilpotent { gamma0: f64 },
    /// `γ₀(−κ) n^κ`.
    Conjugate { kappa: f64, gamma0: f64 },
    /// `γ₁ n^{−c0}`.
    Boundary { c0: f64, gamma1: f64 },
    /// `γ n^κ / √(α₂ ln n + β₂)`.
    Saddle { c1: f64, c2: f64, kappa: f64, alpha2: f64, beta2: f64, gamma: f64 },
}

/// One oscillating term `Re(e^{i x·frequency} γ / √(α₂x + β₂))` of `Q(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicTerm {
    pub k: i64,
    pub l: i64,
    pub frequency: f64,
    pub gamma: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticProfile {
    pub regime: Regime,
    pub constants: Constants,
    /// Off-centre points of `∂K` (saddle regimes with periodicity only).
    pub periodic: Vec<PeriodicTerm>,
    /// Caveats attached to the numbers, e.g. an unproved sub-case.
    pub warnings: Vec<String>,
}

/// A single evaluated prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub n: f64,
    pub value: f64,
    pub regime: Regime,
    /// Power of `n` in the leading term.
    pub exponent: f64,
    /// `α₂ ln n + β₂ ≤ 0`: `β₂` was dropped from the denominator.
    pub radicand_fallback: bool,
}

impl AsymptoticProfile {
    fn new(regime: Regime, constants: Constants) -> Self {
        AsymptoticProfile { regime, constants, periodic: Vec::new(), warnings: Vec::new() }
    }

    pub fn exponent(&self) -> f64 {
        match self.constants {
            Constants::SameSource { .. } => 1.0,
            Constants::Nilpotent { .. } => 0.0,
            Constants::Conjugate { kappa, .. } | Constants::Saddle { kappa, .. } => kappa,
            Constants::Boundary { c0, .. } => -c0,
        }
    }

    /// Leading term at `n` (any real `n ≥ 1`).
    pub fn predict(&self, n: f64) -> Prediction {
        let mut fallback = false;
        let value = match self.constants {
            Constants::SameSource { entropy } => 2.0 * n * LN_2 / entropy,
            Constants::Nilpotent { gamma0 } => gamma0,
            Constants::Conjugate { kappa, gamma0 } => gamma0 * n.powf(kappa),
            Constants::Boundary { c0, gamma1 } => gamma1 * n.powf(-c0),
            Constants::Saddle { kappa, alpha2, beta2, gamma, .. } => {
                let x = n.ln();
                let mut r = alpha2 * x + beta2;
                if !(r > 0.0) {
                    fallback = true;
                    r = alpha2 * x;
                }
                gamma * n.powf(kappa) / r.sqrt()
            }
        };
        Prediction { n, value, regime: self.regime, exponent: self.exponent(), radicand_fallback: fallback }
    }

    /// Truncated periodic correction `Q(x)`, `x = ln n`, over
    /// `|k| ≤ kmax`, `|ℓ| ≤ lmax` excluding the centre. Zero when `∂K` is a
    /// single point. Each term carries `|Γ(c1 + 2πik/ln|A|)|`, which decays
    /// like `e^{−π²|k|/ln|A|}`, so larger alphabets give larger corrections.
    pub fn q_truncated(&self, x: f64, kmax: usize, lmax: usize) -> f64 {
        let Constants::Saddle { alpha2, beta2, .. } = self.constants else {
            return 0.0;
        };
        let mut r = alpha2 * x + beta2;
        if !(r > 0.0) {
            r = alpha2 * x;
        }
        let denom = r.sqrt();
        self.periodic
            .iter()
            .filter(|t| t.k.unsigned_abs() as usize <= kmax && t.l.unsigned_abs() as usize <= lmax)
            .map(|t| (Complex::from_polar(1.0, x * t.frequency) * t.gamma).re / denom)
            .sum()
    }
}

/// `2n ln 2 / h` for a source compared with itself.
pub fn same_source_prediction(model: &MarkovModel, n: f64) -> Result<f64> {
    let h = model.entropy_rate();
    if !(h > 0.0) {
        bail!(Numeric, "entropy rate is zero: a deterministic source has no same-source law");
    }
    Ok(2.0 * n * LN_2 / h)
}

/// Entropy rate of the first source of the kernel, from its edges.
fn kernel_entropy(kernel: &SchurKernel) -> f64 {
    let (l1, _) = kernel.ln_stationary();
    -kernel
        .edges()
        .iter()
        .filter(|e| !l1[e.from as usize].is_nan() && e.l1 < 0.0)
        .map(|e| l1[e.from as usize].exp() * e.l1.exp() * e.l1)
        .sum::<f64>()
}

fn real(z: f64) -> C64 {
    Complex::new(z, 0.0)
}

/// `f·g` at a real point of the two-variable kernel.
fn fg(kernel: &SchurKernel, s1: f64, s2: f64) -> Result<f64> {
    let (_, f, g) = kernel.lambda_f_g(real(s1), real(s2))?;
    Ok((f * g).re)
}

fn second_difference(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(h)? - 2.0 * f(0.0)? + f(-h)?) / (h * h)) };
    let (a, b) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * b - a) / 3.0)
}

fn require(solution: &KernelSolution, regimes: &[Regime]) -> Result<()> {
    if !regimes.contains(&solution.regime) {
        bail!(Input, "regime {} does not match this prediction", solution.regime);
    }
    Ok(())
}

fn saddle_point(solution: &KernelSolution) -> Result<(f64, f64, f64)> {
    match (solution.c1, solution.c2, solution.kappa) {
        (Some(c1), Some(c2), Some(k)) => Ok((c1, c2, k)),
        _ => bail!(Input, "kernel solution has no saddle point"),
    }
}

/// Which form of the leading constants to use.
///
/// The closed forms usually quoted carry a factor `(1+s)Γ(s)` per coordinate and,
/// for general sources, a `1/ln|A|` normalisation. Taking the residue of
/// `Γ(s1)Γ(s2)⟨π|(I − P)^{-1}|1⟩` directly in the strip `−1 < Re s < 0`
/// gives `Γ(s)` and `1/∂₁λ` instead (the two normalisations coincide for a
/// uniform first source). Exact word sums converge to the residue form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Amplitude {
    #[default]
    Residue,
    AsDisplayed,
}

impl Amplitude {
    /// `Γ(s)` or `(s+1)Γ(s)`.
    fn factor(self, s: C64) -> Result<C64> {
        let g = gamma_c(s)?;
        Ok(match self {
            Amplitude::Residue => g,
            Amplitude::AsDisplayed => (s + 1.0) * g,
        })
    }

    /// First and second derivatives of `ln factor` at real `s`.
    fn log_derivatives(self, s: f64) -> Result<(f64, f64)> {
        let (d1, d2) = (digamma(s)?, trigamma(s)?);
        Ok(match self {
            Amplitude::Residue => (d1, d2),
            Amplitude::AsDisplayed => (d1 + 1.0 / (1.0 + s), d2 - (1.0 + s).powi(-2)),
        })
    }
}

/// Constants for a uniform memoryless first source (`L = log_{|A|} λ` of the
/// second source alone, `Φ` the amplitude factor of [`Amplitude`]):
/// `α₂ = L″(c2)`,
/// `β₂ = −α₂((ln Φ)′(c1) + ln|A|) + (ln Φ)″(c1) + (ln Φ)″(c2) + (ln fg)″(c2)`,
/// `γ = f g Φ(c1) Φ(c2) / (λ(c2) ln|A| √(2π))`.
pub fn uniform_saddle_constants(kernel: &SchurKernel, solution: &KernelSolution) -> Result<AsymptoticProfile> {
    uniform_saddle_constants_with(kernel, solution, Amplitude::default())
}

pub fn uniform_saddle_constants_with(
    kernel: &SchurKernel,
    solution: &KernelSolution,
    amp: Amplitude,
) -> Result<AsymptoticProfile> {
    require(solution, &[Regime::InteriorSaddle])?;
    if !kernel.p1_uniform() {
        bail!(Input, "the first source is not uniform");
    }
    let (c1, c2, kappa) = saddle_point(solution)?;
    let ln_a = (kernel.alphabet_len() as f64).ln();
    let d = kernel.lambda_derivatives(0.0, c2)?;
    let alpha2 = (d.d22 / d.lambda - (d.d2 / d.lambda).powi(2)) / ln_a;
    if !(alpha2 > 0.0) {
        bail!(Numeric, "α₂ = {} is not positive at the saddle", alpha2);
    }
    let ln_fg = |t: f64| -> Result<f64> { Ok(fg(kernel, 0.0, c2 + t)?.ln()) };
    let fg_curv = second_difference(ln_fg, FD2_STEP)?;
    let (a1, b1) = amp.log_derivatives(c1)?;
    let (_, b2) = amp.log_derivatives(c2)?;
    let beta2 = -alpha2 * (a1 + ln_a) + b1 + b2 + fg_curv;
    let gamma_at = |s1: C64, s2: C64| -> Result<C64> {
        let (lam, f, g) = kernel.lambda_f_g(real(0.0), s2)?;
        Ok(f * g * amp.factor(s1)? * amp.factor(s2)? / (lam * ln_a * (2.0 * PI).sqrt()))
    };
    let gamma = gamma_at(real(c1), real(c2))?.re;
    let mut profile =
        AsymptoticProfile::new(Regime::InteriorSaddle, Constants::Saddle { c1, c2, kappa, alpha2, beta2, gamma });
    // ∂K: c1 + 2πik/ln|A| along s1, c2 + 2πiℓω along s2 when P2 is related
    let p1 = 2.0 * PI / ln_a;
    let p2 = match solution.periodicity {
        Some(Periodicity::Lattice { period2, .. }) => Some(period2),
        Some(Periodicity::Linear { axis: Axis::S2, period }) => Some(period),
        _ => None,
    };
    profile.periodic = lattice_terms(Some(p1), p2, |k, l| {
        gamma_at(Complex::new(c1, k as f64 * p1), Complex::new(c2, l as f64 * p2.unwrap_or(0.0)))
    })?;
    Ok(profile)
}

const Q_RANGE: i64 = 3;

fn lattice_terms(
    p1: Option<f64>,
    p2: Option<f64>,
    gamma: impl Fn(i64, i64) -> Result<C64>,
) -> Result<Vec<PeriodicTerm>> {
    let kr = if p1.is_some() { Q_RANGE } else { 0 };
    let lr = if p2.is_some() { Q_RANGE } else { 0 };
    let mut out = Vec::new();
    for k in -kr..=kr {
        for l in -lr..=lr {
            if k == 0 && l == 0 {
                continue;
            }
            let frequency = k as f64 * p1.unwrap_or(0.0) + l as f64 * p2.unwrap_or(0.0);
            out.push(PeriodicTerm { k, l, frequency, gamma: gamma(k, l)? });
        }
    }
    Ok(out)
}

/// Constants for two general sources, `H = 1 − λ`, `D = ∂₁ + ∂₂`,
/// `E = ∂₁ − ∂₂`:
/// `α₂ = E²H / H₁`,
/// `β₂ = −(α₂/2)(ψ(c1) + ψ(c2) + D ln fg) + ψ′(c1) + ψ′(c2) + E² ln fg
///       + α₂²/2 − D E²H / (2H₁) + ((H₁₁ − H₂₂)/(2H₁))²`,
/// `γ = f g Φ(c1) Φ(c2) / (N √(2π))` with `N = ∂₁λ` (residue form) or
/// `N = λ ln|A|` (as displayed).
/// `E² ln f + E² ln g` is the gauge-free form of the `f`, `g` terms.
pub fn general_saddle_constants(kernel: &SchurKernel, solution: &KernelSolution) -> Result<AsymptoticProfile> {
    general_saddle_constants_with(kernel, solution, Amplitude::default())
}

pub fn general_saddle_constants_with(
    kernel: &SchurKernel,
    solution: &KernelSolution,
    amp: Amplitude,
) -> Result<AsymptoticProfile> {
    require(solution, &[Regime::InteriorSaddle])?;
    let (c1, c2, kappa) = saddle_point(solution)?;
    let ln_a = (kernel.alphabet_len() as f64).ln();
    let d = kernel.lambda_derivatives(c1, c2)?;
    if (d.d1 - d.d2).abs() > SADDLE_TOL * d.d1.abs().max(1.0) {
        bail!(Numeric, "saddle condition fails: ∂₁λ = {}, ∂₂λ = {}", d.d1, d.d2);
    }
    let h1 = -d.d1;
    let e2h = |s1: f64, s2: f64| -> Result<f64> {
        let d = kernel.lambda_derivatives(s1, s2)?;
        Ok(-(d.d11 + d.d22 - 2.0 * d.d12))
    };
    let alpha2 = e2h(c1, c2)? / h1;
    if !(alpha2 > 0.0) {
        bail!(Numeric, "α₂ = {} is not positive at the saddle", alpha2);
    }
    let d_e2h = richardson(|t| e2h(c1 + t, c2 + t), 0.0, FD_STEP)?;
    let ln_fg_d = richardson(|t| Ok(fg(kernel, c1 + t, c2 + t)?.ln()), 0.0, FD_STEP)?;
    let ln_fg_e2 = second_difference(|t| Ok(fg(kernel, c1 + t, c2 - t)?.ln()), FD2_STEP)?;
    let (h11, h22) = (-d.d11, -d.d22);
    let beta2 = -0.5 * alpha2 * (digamma(c1)? + digamma(c2)? + ln_fg_d)
        + trigamma(c1)?
        + trigamma(c2)?
        + ln_fg_e2
        + 0.5 * alpha2 * alpha2
        - d_e2h / (2.0 * h1)
        + ((h11 - h22) / (2.0 * h1)).powi(2);
    let gamma_at = |s1: C64, s2: C64| -> Result<C64> {
        let (lam, f, g) = kernel.lambda_f_g(s1, s2)?;
        let norm = match amp {
            Amplitude::Residue => real(d.d1),
            Amplitude::AsDisplayed => lam * ln_a,
        };
        Ok(f * g * amp.factor(s1)? * amp.factor(s2)? / (norm * (2.0 * PI).sqrt()))
    };
    let gamma = gamma_at(real(c1), real(c2))?.re;
    let mut profile =
        AsymptoticProfile::new(Regime::InteriorSaddle, Constants::Saddle { c1, c2, kappa, alpha2, beta2, gamma });
    let (p1, p2) = match solution.periodicity {
        Some(Periodicity::Lattice { period1, period2 }) => (Some(period1), Some(period2)),
        Some(Periodicity::Linear { axis: Axis::S1, period }) => (Some(period), None),
        Some(Periodicity::Linear { axis: Axis::S2, period }) => (None, Some(period)),
        _ => (None, None),
    };
    profile.periodic = lattice_terms(p1, p2, |k, l| {
        gamma_at(
            Complex::new(c1, k as f64 * p1.unwrap_or(0.0)),
            Complex::new(c2, l as f64 * p2.unwrap_or(0.0)),
        )
    })?;
    Ok(profile)
}

/// `γ₁ = f g Φ(c0) / H₁` at `(c0, 0)` with `H₁ = −∂λ/∂s1`.
pub fn boundary_profile(kernel: &SchurKernel, solution: &KernelSolution) -> Result<AsymptoticProfile> {
    boundary_profile_with(kernel, solution, Amplitude::default())
}

pub fn boundary_profile_with(
    kernel: &SchurKernel,
    solution: &KernelSolution,
    amp: Amplitude,
) -> Result<AsymptoticProfile> {
    require(solution, &[Regime::BoundaryC2Pos, Regime::BoundaryC1Pos])?;
    let Some(c0) = solution.c0 else {
        bail!(Input, "kernel solution has no boundary root");
    };
    let mirrored;
    let k = if solution.regime == Regime::BoundaryC1Pos {
        mirrored = kernel.swapped();
        &mirrored
    } else {
        kernel
    };
    let d = k.lambda_derivatives(c0, 0.0)?;
    let gamma1 = fg(k, c0, 0.0)? * amp.factor(real(c0))?.re / -d.d1;
    Ok(AsymptoticProfile::new(solution.regime, Constants::Boundary { c0, gamma1 }))
}

pub fn boundary_prediction(kernel: &SchurKernel, solution: &KernelSolution, n: f64) -> Result<f64> {
    Ok(boundary_profile(kernel, solution)?.predict(n).value)
}

/// `γ₀(−κ) = Γ(−κ) ⟨r|u⟩⟨ζ|1⟩ / ∂₁λ` at `(−κ, 0)`, with
/// `r_a = −π1(a)^κ − π2(a)^κ + (π1(a) + π2(a))^κ`.
pub fn conjugate_profile(kernel: &SchurKernel, solution: &KernelSolution) -> Result<AsymptoticProfile> {
    require(solution, &[Regime::Conjugate])?;
    let Some(kappa) = solution.kappa else {
        bail!(Input, "kernel solution has no exponent");
    };
    let s = -kappa;
    let spec = kernel.spectrum_real(s, 0.0)?;
    let d = kernel.lambda_derivatives(s, 0.0)?;
    let (l1, l2) = kernel.ln_stationary();
    let r_u: f64 = l1
        .iter()
        .zip(l2)
        .zip(&spec.u)
        .map(|((&a, &b), u)| {
            let (p, q) = (if a.is_nan() { 0.0 } else { a.exp() }, if b.is_nan() { 0.0 } else { b.exp() });
            let pw = |x: f64| if x > 0.0 { x.powf(kappa) } else { 0.0 };
            (-pw(p) - pw(q) + pw(p + q)) * u.re
        })
        .sum();
    let zeta_1: f64 = spec.zeta.iter().map(|z| z.re).sum();
    let gamma0 = gamma_fn(s)? * r_u * zeta_1 / d.d1;
    let mut profile = AsymptoticProfile::new(Regime::Conjugate, Constants::Conjugate { kappa, gamma0 });
    if !solution.unit_witness {
        profile.warnings.push("conjugacy witness is not constant: only the exponent is established".into());
    }
    Ok(profile)
}

pub fn conjugate_prediction(kernel: &SchurKernel, solution: &KernelSolution, n: f64) -> Result<f64> {
    Ok(conjugate_profile(kernel, solution)?.predict(n).value)
}

/// Profile for any regime: uniform-source constants when the first source
/// is uniform, the general ones otherwise.
pub fn profile(kernel: &SchurKernel, solution: &KernelSolution) -> Result<AsymptoticProfile> {
    profile_with(kernel, solution, Amplitude::default())
}

pub fn profile_with(kernel: &SchurKernel, solution: &KernelSolution, amp: Amplitude) -> Result<AsymptoticProfile> {
    match solution.regime {
        Regime::SameSource => {
            let h = kernel_entropy(kernel);
            if !(h > 0.0) {
                bail!(Numeric, "entropy rate is zero: a deterministic source has no same-source law");
            }
            let mut p = AsymptoticProfile::new(Regime::SameSource, Constants::SameSource { entropy: h });
            if matches!(solution.periodicity, Some(Periodicity::Linear { .. })) {
                p.warnings.push("commensurable source: the linear term carries a periodic factor".into());
            }
            Ok(p)
        }
        Regime::Nilpotent => match solution.gamma0 {
            Some(g) => Ok(AsymptoticProfile::new(Regime::Nilpotent, Constants::Nilpotent { gamma0: g })),
            None => bail!(Input, "kernel solution has no plateau constant"),
        },
        Regime::Conjugate => conjugate_profile(kernel, solution),
        Regime::BoundaryC2Pos | Regime::BoundaryC1Pos => boundary_profile_with(kernel, solution, amp),
        Regime::InteriorSaddle if kernel.p1_uniform() => uniform_saddle_constants_with(kernel, solution, amp),
        Regime::InteriorSaddle => general_saddle_constants_with(kernel, solution, amp),
    }
}

/// Leading-order `C_{n,n}` for the regime of `solution`.
pub fn predict(kernel: &SchurKernel, solution: &KernelSolution, n: f64) -> Result<Prediction> {
    Ok(profile(kernel, solution)?.predict(n))
}
