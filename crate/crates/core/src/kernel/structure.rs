//! Combinatorial and arithmetic structure of kernel matrices: nilpotency,
//! conjugacy and logarithmic rational relatedness.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use super::solve::{Axis, Periodicity};
use super::{Edge, SchurKernel};
use crate::cfrac::{gcd, rationalize};
use crate::error::{bail, Result};
use crate::linalg::Matrix;

pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000;
pub const DEFAULT_RELATEDNESS_TOL: f64 = 1e-9;
const CONJUGACY_TOL: f64 = 1e-9;
const MAX_TRIPLES: usize = 20_000;

/// Smallest `K` with `P(0,0)^K = 0`, or `None` when the common-support
/// graph has a cycle. Equivalent to boolean powers of the support matrix:
/// `K` is one more than the longest path length.
pub fn nilpotency_index(kernel: &SchurKernel) -> Option<usize> {
    let n = kernel.num_states();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in kernel.edges() {
        out[e.from as usize].push(e.to);
        indeg[e.to as usize] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut depth = vec![0usize; n];
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &out[v] {
            let w = w as usize;
            depth[w] = depth[w].max(depth[v] + 1);
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if seen < n {
        return None;
    }
    Some(if kernel.edges().is_empty() { 1 } else { depth.iter().max().copied().unwrap_or(0) + 1 })
}

/// `γ0 = ⟨1_C (I − P(0,0))^{-1} | 1⟩` for a nilpotent common support, where
/// `1_C` marks states with positive probability under both sources. The
/// inverse is the finite sum `Σ_{k<K} P(0,0)^k`, i.e. a path count.
pub fn gamma0_nilpotent(kernel: &SchurKernel) -> Result<f64> {
    if nilpotency_index(kernel).is_none() {
        bail!(Input, "gamma0 is only defined for a nilpotent common support");
    }
    let n = kernel.num_states();
    let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for e in kernel.edges() {
        out[e.from as usize].push(e.to);
        indeg[e.to as usize] += 1;
    }
    // topological order, then path counts from the sinks back
    let mut order = Vec::with_capacity(n);
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &out[v] {
            indeg[w as usize] -= 1;
            if indeg[w as usize] == 0 {
                queue.push_back(w as usize);
            }
        }
    }
    let mut paths = vec![1.0f64; n];
    for &v in order.iter().rev() {
        paths[v] = 1.0 + out[v].iter().map(|&w| paths[w as usize]).sum::<f64>();
    }
    let (l1, l2) = kernel.ln_stationary();
    Ok((0..n).filter(|&a| !l1[a].is_nan() && !l2[a].is_nan()).map(|a| paths[a]).sum())
}

/// Conjugacy test `Q_ij = (x_i/x_j) P_ij`. Returns the witness `x` (with
/// `x = 1` at the root of every connected component) or `None`.
///
/// Log-ratios `ln(Q_ij/P_ij)` must be a potential difference `φ_i − φ_j`;
/// potentials are assigned along a spanning forest and every other edge
/// must close its cycle within 1e−9.
pub fn is_conjugate(p: &Matrix, q: &Matrix) -> Option<Vec<f64>> {
    let n = p.n();
    if q.n() != n {
        return None;
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (p[(i, j)], q[(i, j)]);
            if (a.norm() > 0.0) != (b.norm() > 0.0) {
                return None;
            }
            if a.norm() > 0.0 {
                let r = (b / a).ln();
                if r.im.abs() > CONJUGACY_TOL {
                    return None;
                }
                // φ_i − φ_j = r
                adj[i].push((j, -r.re));
                adj[j].push((i, r.re));
            }
        }
    }
    let mut phi = vec![f64::NAN; n];
    for root in 0..n {
        if !phi[root].is_nan() {
            continue;
        }
        phi[root] = 0.0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, d) in &adj[v] {
                let want = phi[v] + d;
                if phi[w].is_nan() {
                    phi[w] = want;
                    queue.push_back(w);
                } else if (phi[w] - want).abs() > CONJUGACY_TOL {
                    return None;
                }
            }
        }
    }
    Some(phi.into_iter().map(|f| f.exp()).collect())
}

/// Outcome of the logarithmic rational-relatedness heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relatedness {
    Unrelated,
    /// Smallest `ω > 0` making every `ω·θ_abc` an integer; 0 when all
    /// `θ_abc` vanish.
    Related { root: f64 },
}

/// Collects `θ_abc = ln p_ab + ln p_ca − ln p_cb` over triples whose three
/// entries are positive and looks for a common scale making them integers.
/// Ratios to the smallest `|θ|` are approximated by continued fractions with
/// denominators up to `DEFAULT_DENOMINATOR_CAP`; a convergent within `tol` is
/// accepted only when it is exceptionally good for its size (see `cfrac`).
pub fn rational_relatedness(p: &Matrix, tol: f64) -> Relatedness {
    let n = p.n();
    let ln = |i: usize, j: usize| {
        let v = p[(i, j)].re;
        (v > 0.0).then(|| v.ln())
    };
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in out.iter_mut().enumerate() {
        for j in 0..n {
            if let Some(l) = ln(i, j) {
                row.push((j, l));
            }
        }
    }
    let mut thetas = Vec::new();
    'outer: for (c, row) in out.iter().enumerate() {
        let _ = c;
        for &(a, m_ca) in row {
            for &(b, m_cb) in row {
                if let Some(m_ab) = ln(a, b) {
                    thetas.push(m_ab + m_ca - m_cb);
                    if thetas.len() >= MAX_TRIPLES {
                        break 'outer;
                    }
                }
            }
        }
    }
    relatedness_of(&thetas, tol)
}

fn relatedness_of(thetas: &[f64], tol: f64) -> Relatedness {
    let scale = thetas.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let nonzero: Vec<f64> = thetas.iter().copied().filter(|t| t.abs() > 1e-12 * scale.max(1e-300)).collect();
    let Some(reference) = nonzero.iter().copied().min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()) else {
        return Relatedness::Related { root: 0.0 };
    };
    let mut ratios = Vec::with_capacity(nonzero.len());
    let mut denom_lcm: u64 = 1;
    for &t in &nonzero {
        let Some((num, den)) = rationalize(t / reference, DEFAULT_DENOMINATOR_CAP, tol) else {
            return Relatedness::Unrelated;
        };
        denom_lcm = match (denom_lcm / gcd(denom_lcm, den)).checked_mul(den) {
            Some(l) if l <= DEFAULT_DENOMINATOR_CAP => l,
            _ => return Relatedness::Unrelated,
        };
        ratios.push((num, den));
    }
    // θ = (|ref|/L)·k with integers k; ω = L / (g·|ref|), g = gcd of the k's
    let g = ratios
        .iter()
        .map(|&(num, den)| (num.unsigned_abs()) * (denom_lcm / den))
        .fold(0u64, gcd);
    Relatedness::Related { root: denom_lcm as f64 / (g.max(1) as f64 * reference.abs()) }
}

/// Period `2πω` of a related matrix.
fn period(rel: Relatedness) -> Option<f64> {
    match rel {
        Relatedness::Related { root } if root > 0.0 => Some(2.0 * PI * root),
        _ => None,
    }
}

fn effective(kernel: &SchurKernel, pick: impl Fn(&Edge) -> f64) -> Matrix {
    let mut m = Matrix::zeros(kernel.num_states());
    for e in kernel.edges() {
        m[(e.from as usize, e.to as usize)].re = pick(e).exp();
    }
    m
}

/// Structure of `∂K` from the relatedness of `P(−1,0)` and `P(0,−1)`:
/// a lattice when both are related, a line when exactly one is, a single
/// point otherwise.
pub fn commensurability(kernel: &SchurKernel) -> Periodicity {
    let r1 = period(rational_relatedness(&effective(kernel, |e| e.l1), DEFAULT_RELATEDNESS_TOL));
    let r2 = period(rational_relatedness(&effective(kernel, |e| e.l2), DEFAULT_RELATEDNESS_TOL));
    match (r1, r2) {
        (Some(p1), Some(p2)) => Periodicity::Lattice { period1: p1, period2: p2 },
        (Some(p), None) => Periodicity::Linear { axis: Axis::S1, period: p },
        (None, Some(p)) => Periodicity::Linear { axis: Axis::S2, period: p },
        (None, None) => Periodicity::Punctual,
    }
}

/// Relatedness of `P(−1,0)` alone (used for the same-source flag).
pub(crate) fn first_period(kernel: &SchurKernel) -> Option<f64> {
    period(rational_relatedness(&effective(kernel, |e| e.l1), DEFAULT_RELATEDNESS_TOL))
}

/// Conjugacy of `P(−1,0)` and `P(0,−1)` on the common support.
pub(crate) fn effective_conjugacy(kernel: &SchurKernel) -> Option<Vec<f64>> {
    is_conjugate(&effective(kernel, |e| e.l1), &effective(kernel, |e| e.l2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    #[test]
    fn dyadic_matrix_has_root_one_over_ln2() {
        let p = Matrix::from_rows(&[
            &[0.25, 0.125, 0.5, 0.25],
            &[0.25, 0.125, 0.125, 0.5],
            &[0.25, 0.25, 0.25, 0.125],
            &[0.25, 0.5, 0.125, 0.125],
        ]);
        match rational_relatedness(&p, 1e-9) {
            Relatedness::Related { root } => assert!((root - 1.0 / LN_2).abs() < 1e-9, "{}", root),
            r => panic!("{:?}", r),
        }
    }

    #[test]
    fn halves_are_related() {
        let p = Matrix::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(matches!(rational_relatedness(&p, 1e-9), Relatedness::Related { root } if (root - 1.0 / LN_2).abs() < 1e-9));
    }

    #[test]
    fn e_inverse_is_unrelated() {
        let a = (-1.0f64).exp();
        let p = Matrix::from_rows(&[&[a, 1.0 - a], &[1.0 - a, a]]);
        assert_eq!(rational_relatedness(&p, 1e-9), Relatedness::Unrelated);
    }

    #[test]
    fn conjugacy_examples() {
        let p = Matrix::from_rows(&[&[0.2, 0.8], &[0.3, 0.7]]);
        let x = is_conjugate(&p, &p).unwrap();
        assert!(x.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        // D P D^{-1} with D = diag(1, 3)
        let q = Matrix::from_rows(&[&[0.2, 0.8 / 3.0], &[0.9, 0.7]]);
        let x = is_conjugate(&p, &q).unwrap();
        assert!((x[1] / x[0] - 3.0).abs() < 1e-12);
        let mut r = p.clone();
        r[(0, 0)].re += 1e-3;
        assert!(is_conjugate(&p, &r).is_none());
    }
}
