//! Small dense/sparse complex linear algebra: LU solves, Hessenberg +
//! shifted-QR eigenvalues, dominant eigen-triples and the reduced resolvent.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

pub type C64 = Complex<f64>;

/// Dimension up to which the dominant spectrum uses the full QR algorithm.
pub const DENSE_EIGEN_MAX: usize = 64;
/// Largest dimension for the dense fallback when power iteration stalls.
pub const DENSE_FALLBACK_MAX: usize = 512;
/// Power iterations before giving up on a sparse matrix.
const POWER_MAX_ITER: usize = 20_000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// From a row-major slice of reals.
    pub fn from_real(n: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), n * n, "matrix data has the wrong length");
        Matrix { n, data: values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_real(n, &flat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Square complex matrix stored by rows of `(column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(u32, C64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize, rows: Vec<Vec<(u32, C64)>>) -> Self {
        assert_eq!(rows.len(), n);
        SparseMatrix { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<(u32, C64)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i].iter().find(|e| e.0 as usize == j).map_or(ZERO, |e| e.1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j as usize)] = v;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * x[j as usize]).sum()).collect()
    }

    /// `xᵀ A` as a column vector.
    pub fn tmul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j as usize] += v * x[i];
            }
        }
        out
    }

    fn is_real_nonneg(&self) -> bool {
        self.rows.iter().flatten().all(|(_, v)| v.im == 0.0 && v.re >= 0.0)
    }
}

/// Bilinear (unconjugated) product `Σ aᵢbᵢ`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Fails on an exactly singular matrix unless `regularize` is set, in
    /// which case zero pivots are replaced by a tiny multiple of the norm
    /// (inverse iteration wants exactly that).
    pub fn new(a: &Matrix, regularize: bool) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = f64::EPSILON * a.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (mut piv, mut best) = (k, lu[k * n + k].norm());
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            if lu[k * n + k].norm() <= tiny {
                if !regularize {
                    bail!(Numeric, "singular matrix (pivot {} vanishes)", k);
                }
                lu[k * n + k] = C64::new(tiny.max(1e-300), 0.0);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let t = lu[k * n + j];
                        lu[i * n + j] -= f * t;
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let dot = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum::<C64>();
            x[i] -= dot;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = x[i] - row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum::<C64>();
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

pub fn lu_solve(a: &Matrix, b: &[C64]) -> Result<Vec<C64>> {
    Ok(Lu::new(a, false)?.solve(b))
}

fn hessenberg(a: &mut Matrix) {
    let n = a.n;
    for k in 0..n.saturating_sub(2) {
        let alpha_norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // A ← (I − 2vvᴴ) A
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= vi * s * 2.0;
            }
        }
        // A ← A (I − 2vvᴴ)
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| a[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn qr_sweep(h: &mut Matrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (a, b) = (h[(k, k)], h[(k + 1, k)]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
        for j in k..=hi {
            let (x, y) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (t, &(c, s)) in rots.iter().enumerate() {
        let k = lo + t;
        for i in lo..=(k + 2).min(hi) {
            let (x, y) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// All eigenvalues by Hessenberg reduction and Wilkinson-shifted QR.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<C64>> {
    let n = a.n;
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut out = vec![ZERO; n];
    if n == 0 {
        return Ok(out);
    }
    // absolute deflation floor: diagonal entries near zero (defective
    // zero eigenvalues of shift-structured matrices) never pass the
    // relative test
    let floor = f64::EPSILON * h.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag || sub <= floor || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 * n.max(10) {
            bail!(Numeric, "QR iteration did not converge for a {}x{} matrix", n, n);
        }
        let mu = if iter % 11 == 0 {
            // exceptional shift
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, mu);
    }
    Ok(out)
}

/// Dominant eigenvalue with right/left eigenvectors.
///
/// `u` has unit 2-norm with its largest component real-positive; `ζ` is
/// scaled so that the bilinear product `ζᵀu = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lambda: C64,
    pub u: Vec<C64>,
    pub zeta: Vec<C64>,
    /// `|λ| − |λ₂|`; NaN when not estimated (iterative path).
    pub gap: f64,
    /// Gap below 1e−12: the returned branch is one of several.
    pub degenerate: bool,
}

impl Spectrum {
    /// `max |Au − λu|` relative to `max |u|`.
    pub fn residual(&self, a: &Matrix) -> f64 {
        let au = a.mul_vec(&self.u);
        let r = au.iter().zip(&self.u).map(|(x, y)| (x - self.lambda * y).norm()).fold(0.0, f64::max);
        r / norm_inf(&self.u)
    }
}

fn normalize_pair(u: &mut [C64], zeta: &mut [C64]) -> Result<()> {
    let nrm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let big = u.iter().copied().fold(ZERO, |m, z| if z.norm() > m.norm() { z } else { m });
    if nrm == 0.0 || !nrm.is_finite() {
        bail!(Numeric, "eigenvector vanished");
    }
    let scale = big.norm() / (big * nrm);
    u.iter_mut().for_each(|z| *z *= scale);
    let p = dot(zeta, u);
    if p.norm() < 1e-300 || !p.is_finite() {
        bail!(Numeric, "left and right eigenvectors are orthogonal (defective eigenvalue)");
    }
    zeta.iter_mut().for_each(|z| *z /= p);
    Ok(())
}

fn inverse_iteration(a: &Matrix, lambda: C64) -> Result<Vec<C64>> {
    let n = a.n;
    let mut shifted = a.clone();
    let bump = C64::new((lambda.norm() + a.norm_inf()) * 1e-14, 0.0);
    for i in 0..n {
        shifted[(i, i)] -= lambda + bump;
    }
    let lu = Lu::new(&shifted, true)?;
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.1 * (i as f64).sin(), 0.0)).collect();
    for _ in 0..4 {
        let mut y = lu.solve(&x);
        let s = norm_inf(&y);
        if !(s.is_finite() && s > 0.0) {
            bail!(Numeric, "inverse iteration broke down");
        }
        y.iter_mut().for_each(|z| *z /= s);
        x = y;
    }
    Ok(x)
}

/// Dominant (largest-modulus) eigen-triple of a dense matrix. Ties in
/// modulus are broken towards the largest real part, so a non-negative
/// matrix yields its Perron root.
pub fn dominant_spectrum(a: &Matrix) -> Result<Spectrum> {
    let n = a.n;
    if n == 0 {
        bail!(Input, "empty matrix has no spectrum");
    }
    let eig = eigenvalues(a)?;
    let maxmod = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tie = maxmod * (1.0 - 1e-10);
    let (idx, _) = eig
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= tie)
        .fold((usize::MAX, f64::NEG_INFINITY), |(bi, br), (i, z)| if z.re > br { (i, z.re) } else { (bi, br) });
    let lambda0 = eig[idx];
    let second = eig.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let gap = lambda0.norm() - second;
    if maxmod == 0.0 {
        // nilpotent: any vector pair; report the zero eigenvalue
        let mut u = vec![ZERO; n];
        u[0] = ONE;
        let zeta = u.clone();
        return Ok(Spectrum { lambda: ZERO, u, zeta, gap, degenerate: true });
    }
    let mut u = inverse_iteration(a, lambda0)?;
    let mut zeta = inverse_iteration(&a.transpose(), lambda0)?;
    normalize_pair(&mut u, &mut zeta)?;
    let lambda = dot(&zeta, &a.mul_vec(&u));
    Ok(Spectrum { lambda, u, zeta, gap, degenerate: gap < 1e-12 })
}

/// Dominant eigen-triple of a sparse matrix: dense QR up to
/// [`DENSE_EIGEN_MAX`], power iteration above with a dense fallback up to
/// [`DENSE_FALLBACK_MAX`] when the spectral gap is too small to converge.
/// Non-negative real matrices are shifted by a positive multiple of the
/// identity so that the Perron root dominates strictly even for periodic
/// patterns.
pub fn dominant_spectrum_sparse(a: &SparseMatrix) -> Result<Spectrum> {
    if a.n <= DENSE_EIGEN_MAX {
        return dominant_spectrum(&a.to_dense());
    }
    match power_spectrum(a) {
        Err(_) if a.n <= DENSE_FALLBACK_MAX => dominant_spectrum(&a.to_dense()),
        r => r,
    }
}

fn power_spectrum(a: &SparseMatrix) -> Result<Spectrum> {
    let n = a.n;
    let sigma = if a.is_real_nonneg() {
        let row_max = a.rows.iter().map(|r| r.iter().map(|e| e.1.re).sum::<f64>()).fold(0.0, f64::max);
        0.25 * row_max
    } else {
        0.0
    };
    let power = |transpose: bool| -> Result<Vec<C64>> {
        let mut x = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        for _ in 0..POWER_MAX_ITER {
            let mut y = if transpose { a.tmul_vec(&x) } else { a.mul_vec(&x) };
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += xi * sigma;
            }
            let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(nrm.is_finite() && nrm > 0.0) {
                bail!(Numeric, "power iteration collapsed");
            }
            // fix the phase on the largest component to compare iterates
            let big = y.iter().copied().fold(ZERO, |m, z| if z.norm() > m.norm() { z } else { m });
            let ph = big.norm() / big;
            y.iter_mut().for_each(|z| *z *= ph / nrm);
            let diff = y.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            x = y;
            if diff < 1e-14 {
                return Ok(x);
            }
        }
        bail!(Numeric, "power iteration did not converge for a {}x{} matrix", n, n)
    };
    let mut u = power(false)?;
    let mut zeta = power(true)?;
    normalize_pair(&mut u, &mut zeta)?;
    let lambda = dot(&zeta, &a.mul_vec(&u));
    Ok(Spectrum { lambda, u, zeta, gap: f64::NAN, degenerate: false })
}

/// `x = S v` for the reduced resolvent `S = (λI − A)^#`: solves
/// `(λI − A)x = (I − uζᵀ)v` subject to `ζᵀx = 0`.
pub fn reduced_resolvent(a: &SparseMatrix, spec: &Spectrum, v: &[C64]) -> Result<Vec<C64>> {
    let n = a.n;
    let pv = dot(&spec.zeta, v);
    let w: Vec<C64> = v.iter().zip(&spec.u).map(|(vi, ui)| vi - ui * pv).collect();
    if n <= 512 {
        // bordered system [[λI − A, u], [ζᵀ, 0]]
        let mut m = Matrix::zeros(n + 1);
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, val) in row {
                m[(i, j as usize)] -= val;
            }
            m[(i, i)] += spec.lambda;
            m[(i, n)] = spec.u[i];
            m[(n, i)] = spec.zeta[i];
        }
        let mut rhs = w;
        rhs.push(ZERO);
        let mut x = lu_solve(&m, &rhs)?;
        x.pop();
        return Ok(x);
    }
    // fixed point x = (w + A x − λ u ζᵀx)/λ, contracting at rate |λ₂/λ|
    let mut x = vec![ZERO; n];
    for _ in 0..200_000 {
        let ax = a.mul_vec(&x);
        let zx = dot(&spec.zeta, &x);
        let next: Vec<C64> =
            (0..n).map(|i| (w[i] + ax[i] - spec.lambda * spec.u[i] * zx) / spec.lambda).collect();
        let diff = next.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        x = next;
        if diff <= 1e-15 * norm_inf(&x).max(1e-300) {
            let zx = dot(&spec.zeta, &x);
            return Ok(x.iter().zip(&spec.u).map(|(xi, ui)| xi - ui * zx).collect());
        }
    }
    bail!(Numeric, "reduced resolvent iteration did not converge")
}

/// Solves `(I − M)x = b` for a real matrix `M` with spectral radius below 1.
pub fn solve_neumann_real(m: &[Vec<(u32, f64)>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if n <= 128 {
        let mut a = Matrix::identity(n);
        for (i, row) in m.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j as usize)] -= v;
            }
        }
        let rhs: Vec<C64> = b.iter().map(|&x| C64::new(x, 0.0)).collect();
        let x = lu_solve(&a, &rhs)?;
        return Ok(x.into_iter().map(|z| z.re).collect());
    }
    let mut x = b.to_vec();
    for _ in 0..1_000_000 {
        let next: Vec<f64> = m
            .iter()
            .zip(b)
            .map(|(row, bi)| bi + row.iter().map(|&(j, v)| v * x[j as usize]).sum::<f64>())
            .collect();
        let diff = next.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let scale = next.iter().map(|v| v.abs()).fold(0.0, f64::max);
        x = next;
        if !scale.is_finite() {
            break;
        }
        if diff <= 1e-16 * scale {
            return Ok(x);
        }
    }
    bail!(Numeric, "Neumann series did not converge (spectral radius too close to 1)")
}
