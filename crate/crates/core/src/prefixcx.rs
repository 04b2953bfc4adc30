//! Expected joint prefix complexity
//! `C_{n,m} = Σ_{w≠ν} (1 − (1 − P1(w))ⁿ)(1 − (1 − P2(w))ᵐ)`
//! of `n` strings from one source and `m` from another.
//!
//! Words are sequences of contexts: for an order-r model the first "letter"
//! is the initial context, weighted by the stationary law.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{bail, Result};
use crate::kernel::SchurKernel;
use crate::linalg::solve_neumann_real;
use crate::textmodel::MarkovModel;
use crate::util::{ln_factorials, Sum};

/// Default ceiling on `N` for the recurrence (cost `O(|E| N³)`).
pub const DEFAULT_N_CAP: usize = 256;
const TABLE_BUDGET: usize = 1 << 27;
const MAX_TERMS: usize = 30;

/// `C_a[n][m]` per context and the unconditional `C[n][m]`, `0 ≤ n,m ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    n_max: usize,
    states: usize,
    per_state: Vec<f64>,
    total: Vec<f64>,
}

impl RecurrenceTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    fn at(&self, n: usize, m: usize) -> usize {
        n * (self.n_max + 1) + m
    }

    /// Unconditional `C[n][m]`.
    pub fn c(&self, n: usize, m: usize) -> f64 {
        self.total[self.at(n, m)]
    }

    /// `C_a[n][m]`: common prefixes among strings that all start in
    /// context `a` (the one-letter word `a` included).
    pub fn c_state(&self, a: usize, n: usize, m: usize) -> f64 {
        let w = (self.n_max + 1) * (self.n_max + 1);
        self.per_state[a * w + self.at(n, m)]
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

/// Binomial weights `Bin(n, k; p)` for `0 ≤ k ≤ n ≤ N`, computed in log
/// space; row-major `(N+1)×(N+1)`.
fn binomial_table(p: f64, n_max: usize, lf: &[f64]) -> Vec<f64> {
    let w = n_max + 1;
    let mut t = vec![0.0; w * w];
    if p >= 1.0 {
        for n in 0..=n_max {
            t[n * w + n] = 1.0;
        }
        return t;
    }
    if p <= 0.0 {
        for n in 0..=n_max {
            t[n * w] = 1.0;
        }
        return t;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    for n in 0..=n_max {
        for k in 0..=n {
            t[n * w + k] = (lf[n] - lf[k] - lf[n - k] + k as f64 * lp + (n - k) as f64 * lq).exp();
        }
    }
    t
}

/// Exact `C[n][m]` for `n, m ≤ N` by the discrete recurrence
///
/// `C_b[n][m] = 1 + Σ_{b→a} Σ_{k,l} Bin(n,k;P1(a|b)) Bin(m,l;P2(a|b)) C_a[k][l]`
///
/// over transitions common to both sources, and
/// `C[n][m] = Σ_a Σ_{k,l} Bin(n,k;π1(a)) Bin(m,l;π2(a)) C_a[k][l]`.
/// The term `k = n, l = m` couples contexts at the same level; it is solved
/// by fixed-point iteration, which contracts at rate `λ(−1,−1) < 1`.
pub fn recurrence_c(m1: &MarkovModel, m2: &MarkovModel, n_max: usize) -> Result<RecurrenceTable> {
    recurrence_c_capped(m1, m2, n_max, DEFAULT_N_CAP)
}

pub fn recurrence_c_capped(m1: &MarkovModel, m2: &MarkovModel, n_max: usize, cap: usize) -> Result<RecurrenceTable> {
    if n_max > cap {
        bail!(Capacity, "N = {} exceeds the recurrence cap of {}", n_max, cap);
    }
    let kernel = SchurKernel::new(m1, m2)?;
    let s = kernel.num_states();
    let w = n_max + 1;
    let edges = kernel.edges();
    if (3 * edges.len() + 2 * s).saturating_mul(w * w) > TABLE_BUDGET {
        bail!(Capacity, "recurrence tables for {} transitions at N = {} exceed the memory budget", edges.len(), n_max);
    }
    if !edges.is_empty() && kernel.lambda(-1.0, -1.0)? >= 1.0 {
        bail!(Numeric, "λ(−1,−1) ≥ 1: the expected common-prefix count is infinite");
    }
    let lf = ln_factorials(n_max);
    let b1: Vec<Vec<f64>> = edges.iter().map(|e| binomial_table(e.l1.exp(), n_max, &lf)).collect();
    let b2: Vec<Vec<f64>> = edges.iter().map(|e| binomial_table(e.l2.exp(), n_max, &lf)).collect();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); s];
    for (i, e) in edges.iter().enumerate() {
        out_edges[e.from as usize].push(i);
    }
    let ww = w * w;
    let mut c = vec![0.0; s * ww];
    // t[e][k][m] = Σ_{l ≤ m} Bin(m,l;P2) C_to[k][l], filled once row k is final
    let mut t = vec![0.0; edges.len() * ww];
    let mut rhs = vec![0.0; s];
    let mut selfw: Vec<f64> = vec![0.0; edges.len()];
    for n in 1..=n_max {
        for m in 1..=n_max {
            for b in 0..s {
                let mut acc = Sum::default();
                acc.add(1.0);
                for &ei in &out_edges[b] {
                    let to = edges[ei].to as usize;
                    let (bn, bm) = (&b1[ei][n * w..n * w + w], &b2[ei][m * w..m * w + w]);
                    for k in 0..n {
                        acc.add(bn[k] * t[ei * ww + k * w + m]);
                    }
                    let mut row = 0.0;
                    for l in 0..m {
                        row += bm[l] * c[to * ww + n * w + l];
                    }
                    acc.add(bn[n] * row);
                    selfw[ei] = bn[n] * bm[m];
                }
                rhs[b] = acc.value();
            }
            // x_b = rhs_b + Σ_{b→a} selfw · x_a  (Gauss–Seidel)
            for b in 0..s {
                c[b * ww + n * w + m] = rhs[b];
            }
            let mut converged = false;
            for _ in 0..100_000 {
                let mut delta: f64 = 0.0;
                let mut scale: f64 = 0.0;
                for b in 0..s {
                    let mut v = rhs[b];
                    for &ei in &out_edges[b] {
                        v += selfw[ei] * c[edges[ei].to as usize * ww + n * w + m];
                    }
                    let cell = &mut c[b * ww + n * w + m];
                    delta = delta.max((v - *cell).abs());
                    scale = scale.max(v.abs());
                    *cell = v;
                }
                if delta <= 1e-16 * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                bail!(Numeric, "recurrence self-coupling did not converge at n={}, m={}", n, m);
            }
        }
        for (ei, e) in edges.iter().enumerate() {
            let to = e.to as usize;
            for m in 0..=n_max {
                let bm = &b2[ei][m * w..m * w + w];
                let mut v = 0.0;
                for l in 0..=m {
                    v += bm[l] * c[to * ww + n * w + l];
                }
                t[ei * ww + n * w + m] = v;
            }
        }
    }
    let (lpi1, lpi2) = kernel.ln_stationary();
    let mut total = vec![0.0; ww];
    for a in 0..s {
        if lpi1[a].is_nan() || lpi2[a].is_nan() {
            continue;
        }
        let ba = binomial_table(lpi1[a].exp(), n_max, &lf);
        let bb = binomial_table(lpi2[a].exp(), n_max, &lf);
        // u[k][m] = Σ_l Bin(m,l;π2) C_a[k][l]
        let mut u = vec![0.0; ww];
        for k in 1..=n_max {
            for m in 1..=n_max {
                u[k * w + m] = (1..=m).map(|l| bb[m * w + l] * c[a * ww + k * w + l]).sum();
            }
        }
        for n in 1..=n_max {
            for m in 1..=n_max {
                total[n * w + m] += (1..=n).map(|k| ba[n * w + k] * u[k * w + m]).sum::<f64>();
            }
        }
    }
    Ok(RecurrenceTable { n_max, states: s, per_state: c, total })
}

/// Traversal settings for [`word_sum_c`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordSumConfig {
    /// A subtree whose root has `n·P1(w) ≤ τ` and `m·P2(w) ≤ τ` is summed in
    /// closed form instead of being expanded.
    pub tau: f64,
    /// Depth limit; `None` means `10·log_{1/λ(−1,−1)}(n·m)`.
    pub max_depth: Option<usize>,
    /// A subtree whose total mass is provably below this is dropped (and
    /// its bound added to the error).
    pub drop_tol: f64,
}

impl Default for WordSumConfig {
    fn default() -> Self {
        WordSumConfig { tau: 0.5, max_depth: None, drop_tol: 1e-17 }
    }
}

/// Value of `C_{n,m}` with a rigorous bound on the neglected part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordSum {
    pub value: f64,
    pub error_bound: f64,
    /// Trie nodes expanded explicitly.
    pub nodes: u64,
}

/// Precomputed pieces shared by word sums for one pair of sources.
#[derive(Debug, Clone)]
pub struct WordSumPlan {
    states: usize,
    out: Vec<Vec<(u32, f64, f64)>>,
    roots: Vec<(u32, f64, f64)>,
    lambda12: f64,
    /// `resolvent[j][k][b] = [(I − M_jk)^{-1} 1]_b`, `M_jk(b,a) = P1(a|b)^j P2(a|b)^k`.
    resolvent: Vec<Vec<f64>>,
}

impl WordSumPlan {
    pub fn new(m1: &MarkovModel, m2: &MarkovModel) -> Result<Self> {
        let kernel = SchurKernel::new(m1, m2)?;
        let s = kernel.num_states();
        let mut out = vec![Vec::new(); s];
        for e in kernel.edges() {
            out[e.from as usize].push((e.to, e.l1.exp(), e.l2.exp()));
        }
        let lambda12 = if kernel.edges().is_empty() { 0.0 } else { kernel.lambda(-1.0, -1.0)? };
        if lambda12 >= 1.0 - 1e-12 {
            bail!(
                Numeric,
                "λ(−1,−1) = {} ≥ 1: the word sum does not terminate (deterministic common cycle)",
                lambda12
            );
        }
        let (l1, l2) = kernel.ln_stationary();
        let roots = (0..s)
            .filter(|&a| !l1[a].is_nan() && !l2[a].is_nan())
            .map(|a| (a as u32, l1[a].exp(), l2[a].exp()))
            .collect();
        let ones = vec![1.0; s];
        let mut resolvent = Vec::with_capacity((MAX_TERMS + 2) * (MAX_TERMS + 2));
        for j in 0..=MAX_TERMS + 1 {
            for k in 0..=MAX_TERMS + 1 {
                if j == 0 || k == 0 {
                    resolvent.push(Vec::new());
                    continue;
                }
                let m: Vec<Vec<(u32, f64)>> = out
                    .iter()
                    .map(|row| row.iter().map(|&(a, p, q)| (a, p.powi(j as i32) * q.powi(k as i32))).collect())
                    .collect();
                resolvent.push(solve_neumann_real(&m, &ones)?);
            }
        }
        Ok(WordSumPlan { states: s, out, roots, lambda12, resolvent })
    }

    /// Dominant eigenvalue of the Schur product `P1 ⋆ P2` (common support).
    pub fn lambda12(&self) -> f64 {
        self.lambda12
    }

    #[inline]
    fn r(&self, j: usize, k: usize) -> &[f64] {
        &self.resolvent[j * (MAX_TERMS + 2) + k]
    }

    /// `Σ_w P1(w)P2(w)` over words starting in context `b` (the bound used
    /// for pruning).
    pub fn r11(&self, b: usize) -> f64 {
        self.r(1, 1)[b]
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn evaluate(&self, n: u64, m: u64, cfg: &WordSumConfig) -> Result<WordSum> {
        if n == 0 || m == 0 {
            bail!(Input, "word sum needs n, m >= 1 (got n={}, m={})", n, m);
        }
        if !(cfg.tau > 0.0) || cfg.max_depth == Some(0) {
            bail!(Input, "word sum needs tau > 0 and max depth >= 1");
        }
        let (nf, mf) = (n as f64, m as f64);
        let depth_cap = cfg.max_depth.unwrap_or_else(|| {
            if self.lambda12 <= 0.0 {
                usize::MAX
            } else {
                let d = 10.0 * (nf * mf).ln() / (1.0 / self.lambda12).ln();
                (d.ceil() as usize).max(16)
            }
        });
        let slack = cfg.tau.exp();
        let mut value = Sum::default();
        let mut error = Sum::default();
        let mut nodes = 0u64;
        let mut stack: Vec<(u32, f64, f64, usize)> = self.roots.iter().map(|&(a, x, y)| (a, x, y, 1)).collect();
        while let Some((b, x, y, depth)) = stack.pop() {
            let (nx, my) = (nf * x, mf * y);
            let bu = b as usize;
            if nx <= cfg.tau && my <= cfg.tau {
                let (v, e) = self.closed_form(bu, n, m, x, y, slack);
                value.add(v);
                error.add(e);
                continue;
            }
            let mass = nx * my * self.r11(bu);
            if mass <= cfg.drop_tol || depth >= depth_cap {
                // 0 ≤ subtree sum ≤ n·m·Σ P1(w)P2(w); count half as the estimate
                value.add(0.5 * mass);
                error.add(0.5 * mass);
                continue;
            }
            nodes += 1;
            value.add(hit(n, x) * hit(m, y));
            for &(a, p, q) in &self.out[bu] {
                stack.push((a, x * p, y * q, depth + 1));
            }
        }
        Ok(WordSum { value: value.value(), error_bound: error.value(), nodes })
    }

    /// Sum over the whole subtree rooted at a word ending in `b` with
    /// probabilities `x`, `y`, using
    /// `1 − (1−x)ⁿ = Σ_j (−1)^{j+1} C(n,j) x^j` truncated where the tail is
    /// negligible.
    fn closed_form(&self, b: usize, n: u64, m: u64, x: f64, y: f64, slack: f64) -> (f64, f64) {
        let (nx, my) = (n as f64 * x, m as f64 * y);
        let coeffs = |n: u64, x: f64| -> (Vec<f64>, f64) {
            // a_j = (−1)^{j+1} C(n,j) x^j; stops exactly once j > n
            let nx = n as f64 * x;
            let mut a = Vec::with_capacity(MAX_TERMS);
            let mut cur = nx;
            let mut tail_term = nx; // |a_j| upper bound (nx)^j / j!
            let mut j = 1u64;
            loop {
                a.push(cur);
                if j >= n {
                    return (a, 0.0);
                }
                tail_term *= nx / (j + 1) as f64;
                if tail_term <= 1e-17 * nx || a.len() == MAX_TERMS {
                    return (a, tail_term * slack);
                }
                cur = -cur * (n - j) as f64 / (j + 1) as f64 * x;
                j += 1;
            }
        };
        let (a, ta) = coeffs(n, x);
        let (bk, tb) = coeffs(m, y);
        let mut v = Sum::default();
        for (j, aj) in a.iter().enumerate() {
            let mut inner = 0.0;
            for (k, bkv) in bk.iter().enumerate() {
                inner += bkv * self.r(j + 1, k + 1)[b];
            }
            v.add(aj * inner);
        }
        let err = self.r11(b) * slack * (ta * my + nx * tb);
        (v.value(), err)
    }
}

/// `1 − (1 − x)ⁿ` without cancellation.
#[inline]
fn hit(n: u64, x: f64) -> f64 {
    -(n as f64 * (-x).ln_1p()).exp_m1()
}

/// `C_{n,m}` by traversing the word trie; see [`WordSumPlan::evaluate`].
pub fn word_sum_c(m1: &MarkovModel, m2: &MarkovModel, n: u64, m: u64, cfg: &WordSumConfig) -> Result<WordSum> {
    WordSumPlan::new(m1, m2)?.evaluate(n, m, cfg)
}

/// One `(n, m)` cell of a method comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub n: usize,
    pub m: usize,
    pub recurrence: f64,
    pub word_sum: f64,
    pub error_bound: f64,
    pub difference: f64,
}

/// Recurrence versus word sum for all `1 ≤ n, m ≤ N`.
pub fn compare_methods(m1: &MarkovModel, m2: &MarkovModel, n_max: usize) -> Result<Vec<Discrepancy>> {
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let table = recurrence_c(m1, m2, n_max)?;
    let plan = WordSumPlan::new(m1, m2)?;
    let cfg = WordSumConfig::default();
    let mut rows = Vec::with_capacity(n_max * n_max);
    for n in 1..=n_max {
        for m in 1..=n_max {
            let ws = plan.evaluate(n as u64, m as u64, &cfg)?;
            let rec = table.c(n, m);
            rows.push(Discrepancy {
                n,
                m,
                recurrence: rec,
                word_sum: ws.value,
                error_bound: ws.error_bound,
                difference: (rec - ws.value).abs(),
            });
        }
    }
    Ok(rows)
}

/// Largest `|recurrence − word sum|` in a comparison.
pub fn max_discrepancy(rows: &[Discrepancy]) -> f64 {
    rows.iter().map(|r| r.difference).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> MarkovModel {
        MarkovModel::from_rows(["a", "b"], &[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn boundary_rows_vanish() {
        let t = recurrence_c(&uniform(), &uniform(), 5).unwrap();
        for k in 0..=5 {
            assert_eq!(t.c(0, k), 0.0);
            assert_eq!(t.c(k, 0), 0.0);
        }
    }

    #[test]
    fn uniform_pair_c11_is_one() {
        let t = recurrence_c(&uniform(), &uniform(), 3).unwrap();
        assert!((t.c(1, 1) - 1.0).abs() < 1e-14);
        let ws = word_sum_c(&uniform(), &uniform(), 1, 1, &WordSumConfig::default()).unwrap();
        assert!((ws.value - 1.0).abs() < 1e-12, "{:?}", ws);
        assert!(ws.error_bound < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(recurrence_c(&uniform(), &uniform(), 300), Err(crate::Error::Capacity(_))));
    }

    #[test]
    fn deterministic_common_cycle_is_rejected() {
        let alt = MarkovModel::from_rows(["a", "b"], &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(word_sum_c(&alt, &alt, 3, 3, &WordSumConfig::default()), Err(crate::Error::Numeric(_))));
    }

    #[test]
    fn empty_comparison() {
        assert!(compare_methods(&uniform(), &uniform(), 0).unwrap().is_empty());
    }
}
