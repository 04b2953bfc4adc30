//! Continued-fraction rational approximation.

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

/// A convergent `p/q` is accepted only if it is also unusually good for its
/// size, `q²·|x − p/q| ≤ QUALITY`. Generic irrationals have
/// `q²·|x − p/q| ≈ 1/a_{k+1}`, so this rejects them unless a partial
/// quotient exceeds `1/QUALITY`.
const QUALITY: f64 = 1e-3;

/// First convergent `p/q` of `x` with `q ≤ qmax`, `|x − p/q| ≤ tol` and the
/// quality condition above.
pub(crate) fn rationalize(x: f64, qmax: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (1i128, x.floor() as i128);
    let (mut k0, mut k1) = (0i128, 1i128);
    let mut frac = x - x.floor();
    loop {
        let err = (x - h1 as f64 / k1 as f64).abs();
        let q = k1 as f64;
        if err <= tol && q * q * err <= QUALITY {
            return Some((h1 as i64, k1 as u64));
        }
        if frac < 1e-300 {
            return None;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 as u128 > qmax as u128 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratios() {
        assert_eq!(rationalize(1.5, 1_000_000, 1e-9), Some((3, 2)));
        assert_eq!(rationalize(-2.0, 1_000_000, 1e-9), Some((-2, 1)));
        assert_eq!(rationalize(2.0 / 3.0, 1_000_000, 1e-9), Some((2, 3)));
    }

    #[test]
    fn irrational_rejected() {
        // -ln(1 - 1/e): convergent 21638/47175 is within 4e-10 but is an
        // ordinary convergent, not an exceptional one
        let r = -(1.0 - (-1.0f64).exp()).ln();
        assert_eq!(rationalize(r, 1_000_000, 1e-9), None);
        assert_eq!(rationalize(core::f64::consts::PI, 1_000_000, 1e-9), None);
        assert_eq!(rationalize(2f64.sqrt(), 1_000_000, 1e-9), None);
    }
}
