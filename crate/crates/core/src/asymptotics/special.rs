//! Γ (complex), ψ and ψ′ (real).

use core::f64::consts::PI;

use num_complex::Complex;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::C64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn pole_at(x: f64) -> Option<f64> {
    (x <= 0.0 && x == x.round()).then_some(x)
}

/// `ln Γ(z)` for `Re z ≥ 1/2` (Lanczos, g = 7).
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut acc = Complex::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(z) for complex `z`; reflection handles `Re z < 1/2`.
pub fn gamma_c(z: C64) -> Result<C64> {
    if z.im == 0.0 {
        if let Some(p) = pole_at(z.re) {
            return Err(Error::Pole(p));
        }
    }
    if z.re < 0.5 {
        // Γ(z) = π / (sin(πz) Γ(1−z))
        let s = (z * PI).sin();
        return Ok(Complex::new(PI, 0.0) / (s * ln_gamma_right(Complex::new(1.0, 0.0) - z).exp()));
    }
    Ok(ln_gamma_right(z).exp())
}

pub fn gamma_fn(x: f64) -> Result<f64> {
    Ok(gamma_c(Complex::new(x, 0.0))?.re)
}

/// Digamma ψ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if let Some(p) = pole_at(x) {
        return Err(Error::Pole(p));
    }
    if x < 0.5 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let (mut x, mut acc) = (x, 0.0);
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32_760.0 - r / 12.0))))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Trigamma ψ′(x).
pub fn trigamma(x: f64) -> Result<f64> {
    if let Some(p) = pole_at(x) {
        return Err(Error::Pole(p));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI * PI / (s * s) - trigamma(1.0 - x)?);
    }
    let (mut x, mut acc) = (x, 0.0);
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = (1.0
        + r * (1.0 / 6.0
            - r * (1.0 / 30.0
                - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0)))))))
        / x;
    Ok(acc + series + 0.5 * r)
}
