mod common;

use common::*;
use jcx_core::kernel::{
    is_conjugate, kernel_s1, nilpotency_index, rational_relatedness, solve_kernel, Periodicity, Regime,
    Relatedness, SchurKernel, DEFAULT_RELATEDNESS_TOL,
};
use jcx_core::linalg::Matrix;
use jcx_core::textmodel::MarkovModel;
use proptest::prelude::*;

/// Minimiser of a unimodal function by grid scan then repeated refinement.
fn scan_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..12 {
        let step = (hi - lo) / 200.0;
        let best = (0..=200).map(|i| lo + i as f64 * step).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        lo = best - step;
        hi = best + step;
    }
    0.5 * (lo + hi)
}

#[test]
fn identical_sources_have_unit_exponent() {
    for m in [uniform2(), skewed(), random_pair().0] {
        let sol = solve_kernel(&SchurKernel::new(&m, &m).unwrap()).unwrap();
        assert_eq!(sol.regime, Regime::SameSource);
        assert!((sol.exponent() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn skewed_saddle_matches_scan() {
    // λ(0,s) = 0.2^{-s} + 0.8^{-s} for this symmetric matrix
    let l = |s: f64| (0.2f64.powf(-s) + 0.8f64.powf(-s)).log2();
    let c2 = scan_min(|s| l(s) - s, -0.99, 0.0);
    let kappa = l(c2) - c2;
    let sol = solve_kernel(&SchurKernel::new(&uniform2(), &skewed()).unwrap()).unwrap();
    assert_eq!(sol.regime, Regime::InteriorSaddle);
    assert!((sol.c2.unwrap() - c2).abs() <= 1e-6, "{:?} vs {c2}", sol.c2);
    assert!((sol.kappa.unwrap() - kappa).abs() <= 1e-6);
    assert!(sol.c2.unwrap() < 0.0);
    assert!((sol.c1.unwrap() + l(sol.c2.unwrap())).abs() < 1e-9);
}

#[test]
fn golden_boundary() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let sol = solve_kernel(&SchurKernel::new(&uniform2(), &golden()).unwrap()).unwrap();
    assert_eq!(sol.regime, Regime::BoundaryC2Pos);
    assert!((sol.exponent() - phi.log2()).abs() <= 1e-9);
    let mirrored = solve_kernel(&SchurKernel::new(&golden(), &uniform2()).unwrap()).unwrap();
    assert_eq!(mirrored.regime, Regime::BoundaryC1Pos);
    assert!((mirrored.exponent() - phi.log2()).abs() <= 1e-9);
}

#[test]
fn nilpotent_pair_plateau() {
    let (p1, p2) = nilpotent_pair();
    let k = SchurKernel::new(&p1, &p2).unwrap();
    assert_eq!(nilpotency_index(&k), Some(2));
    let sol = solve_kernel(&k).unwrap();
    assert_eq!(sol.regime, Regime::Nilpotent);
    // a, b, c and ab
    assert_eq!(sol.gamma0, Some(4.0));
}

fn spectral_radius(m: &[[f64; 4]; 4]) -> f64 {
    let mut v = [1.0; 4];
    let mut r = 0.0;
    for _ in 0..5000 {
        let mut w = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                w[i] += m[i][j] * v[j];
            }
        }
        r = w.iter().cloned().fold(0.0, f64::max);
        for i in 0..4 {
            v[i] = w[i] / r;
        }
    }
    r
}

#[test]
fn conjugate_pair_exponent() {
    let (p1, p2) = conjugate_pair();
    let k = SchurKernel::new(&p1, &p2).unwrap();
    let sol = solve_kernel(&k).unwrap();
    assert_eq!(sol.regime, Regime::Conjugate);
    assert!(sol.unit_witness);
    // shared part of both matrices
    let shared = [[0.0, 0.0, 0.0, 0.5], [0.0, 0.125, 0.125, 0.25], [0.0, 0.25, 0.25, 0.125], [0.0, 0.0, 0.0, 0.125]];
    let radius = |kappa: f64| {
        let mut m = shared;
        m.iter_mut().flatten().for_each(|x: &mut f64| *x = if *x > 0.0 { x.powf(kappa) } else { 0.0 });
        spectral_radius(&m)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if radius(mid) > 1.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    assert!((sol.kappa.unwrap() - 0.5 * (lo + hi)).abs() < 1e-9);
}

#[test]
fn conjugacy_detector() {
    let (p1, p2) = conjugate_pair();
    let k = SchurKernel::new(&p1, &p2).unwrap();
    let (a, b) = (k.eval_p_real(-1.0, 0.0).to_dense(), k.eval_p_real(0.0, -1.0).to_dense());
    assert!(is_conjugate(&a, &b).is_some());
    // move mass between two shared entries of one column
    let s = ["a", "b", "c", "d"];
    let mut rows: Vec<Vec<f64>> = (0..4).map(|a| (0..4).map(|b| p2.p(a, b)).collect()).collect();
    rows[1][1] += 0.05;
    rows[2][1] -= 0.05;
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let perturbed = MarkovModel::from_rows(s, &refs).unwrap();
    let k = SchurKernel::new(&p1, &perturbed).unwrap();
    let (a, b) = (k.eval_p_real(-1.0, 0.0).to_dense(), k.eval_p_real(0.0, -1.0).to_dense());
    assert!(is_conjugate(&a, &b).is_none());
    assert_ne!(solve_kernel(&k).unwrap().regime, Regime::Conjugate);
    // a diagonal similarity is still detected
    let x = [1.0, 2.0, 0.5, 3.0];
    let mut q = Matrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            q[(i, j)] = a[(i, j)] * x[i] / x[j];
        }
    }
    assert!(is_conjugate(&a, &q).is_some());
    let mut bad = q.clone();
    bad[(1, 2)] *= 1.01;
    assert!(is_conjugate(&a, &bad).is_none());
}

#[test]
fn relatedness_of_dyadic_matrix() {
    let m = Matrix::from_rows(&[&[0.5, 0.25], &[0.5, 0.75]]);
    assert_eq!(rational_relatedness(&m, DEFAULT_RELATEDNESS_TOL), Relatedness::Unrelated);
    let m = Matrix::from_rows(&[&[0.5, 0.25], &[0.5, 0.125]]);
    assert!(matches!(rational_relatedness(&m, DEFAULT_RELATEDNESS_TOL), Relatedness::Related { .. }));
}

#[test]
fn uniform_first_source_is_periodic_along_s1() {
    let sol = solve_kernel(&SchurKernel::new(&uniform2(), &skewed()).unwrap()).unwrap();
    match sol.periodicity {
        Some(Periodicity::Linear { period, .. }) | Some(Periodicity::Lattice { period1: period, .. }) => {
            assert!((period - 2.0 * std::f64::consts::PI / std::f64::consts::LN_2).abs() < 1e-9)
        }
        other => panic!("{other:?}"),
    }
}

fn saddle_pairs() -> Vec<SchurKernel> {
    let (r1, r2) = random_pair();
    vec![
        SchurKernel::new(&uniform2(), &skewed()).unwrap(),
        SchurKernel::new(&r1, &r2).unwrap(),
        SchurKernel::new(&uniform2(), &golden()).unwrap(),
    ]
}

#[test]
fn kernel_curve_is_concave_and_l_convex() {
    let h = 1e-2;
    for k in saddle_pairs() {
        for i in 0..60 {
            let s = -0.9 + i as f64 * 0.03;
            let f = |t: f64| kernel_s1(&k, t).unwrap();
            let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
            assert!(d2 <= 1e-6, "kernel not concave at {s}: {d2}");
            let l = |t: f64| k.ln_lambda(0.0, t).unwrap();
            let d2 = (l(s + h) - 2.0 * l(s) + l(s - h)) / (h * h);
            assert!(d2 >= -1e-6, "ln λ not convex at {s}: {d2}");
        }
    }
}

#[test]
fn analytic_derivatives_match_differences() {
    let h = 1e-4;
    for k in saddle_pairs() {
        for &(s1, s2) in &[(-0.5, -0.4), (-0.2, -0.7), (0.3, -0.1)] {
            let d = k.lambda_derivatives(s1, s2).unwrap();
            let l = |a: f64, b: f64| k.lambda(a, b).unwrap();
            let fd1 = (l(s1 + h, s2) - l(s1 - h, s2)) / (2.0 * h);
            let fd2 = (l(s1, s2 + h) - l(s1, s2 - h)) / (2.0 * h);
            let fd11 = (l(s1 + h, s2) - 2.0 * l(s1, s2) + l(s1 - h, s2)) / (h * h);
            let fd22 = (l(s1, s2 + h) - 2.0 * l(s1, s2) + l(s1, s2 - h)) / (h * h);
            let fd12 = (l(s1 + h, s2 + h) - l(s1 + h, s2 - h) - l(s1 - h, s2 + h) + l(s1 - h, s2 - h)) / (4.0 * h * h);
            let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * a.abs().max(1.0);
            assert!(close(d.lambda, l(s1, s2), 1e-12));
            assert!(close(d.d1, fd1, 1e-6) && close(d.d2, fd2, 1e-6), "{d:?} {fd1} {fd2}");
            assert!(close(d.d11, fd11, 1e-5) && close(d.d22, fd22, 1e-5) && close(d.d12, fd12, 1e-5), "{d:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_is_increasing_in_s1(p in 0.05f64..0.95, q in 0.05f64..0.95, s2 in -0.9f64..0.5, s1 in -0.9f64..0.5) {
        let m2 = binary(&[&[p, q], &[1.0 - p, 1.0 - q]]);
        let k = SchurKernel::new(&uniform2(), &m2).unwrap();
        prop_assert!(k.lambda(s1 + 0.05, s2).unwrap() > k.lambda(s1, s2).unwrap());
        prop_assert!((k.lambda(0.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        prop_assert!((k.lambda(-1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_roots_solve_the_equation(p in 0.05f64..0.95, q in 0.05f64..0.95, s2 in -0.9f64..1.0) {
        let m2 = binary(&[&[p, q], &[1.0 - p, 1.0 - q]]);
        let k = SchurKernel::new(&uniform2(), &m2).unwrap();
        let s1 = kernel_s1(&k, s2).unwrap();
        prop_assert!((k.lambda(s1, s2).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exponent_is_at_most_one(p in 0.05f64..0.95, q in 0.05f64..0.95) {
        let m2 = binary(&[&[p, q], &[1.0 - p, 1.0 - q]]);
        let sol = solve_kernel(&SchurKernel::new(&uniform2(), &m2).unwrap()).unwrap();
        prop_assert!(sol.exponent() <= 1.0 + 1e-9 && sol.exponent() > 0.0, "{:?}", sol);
    }
}

/// Order-3 model over `k` letters with pseudo-random full-support columns.
fn order3(k: usize, seed: u64) -> MarkovModel {
    let s = k * k * k;
    let mut state = seed;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64).powi(3) + 1e-3
    };
    let mut t = vec![0.0; s * s];
    for b in 0..s {
        let w: Vec<f64> = (0..k).map(|_| next()).collect();
        let total: f64 = w.iter().sum();
        for (sym, x) in w.iter().enumerate() {
            t[((b * k + sym) % s) * s + b] = x / total;
        }
    }
    let letters: Vec<String> = (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    MarkovModel::new(jcx_core::textmodel::Alphabet::new(letters).unwrap(), 3, t).unwrap()
}

/// `ln ρ` of the entrywise product by shifted power iteration with
/// Collatz–Wielandt bounds.
fn ln_perron(m1: &MarkovModel, m2: &MarkovModel, s1: f64, s2: f64) -> f64 {
    let n = m1.num_states();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| m1.p(a, b) > 0.0 && m2.p(a, b) > 0.0)
        .map(|(a, b)| (a, b, m1.p(a, b).powf(-s1) * m2.p(a, b).powf(-s2)))
        .collect();
    let mut v = vec![1.0; n];
    for _ in 0..100_000 {
        let mut w = v.clone();
        for &(a, b, x) in &entries {
            w[a] += x * v[b];
        }
        let ratios = w.iter().zip(&v).map(|(x, y)| x / y - 1.0);
        let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
        if hi - lo <= 1e-13 * hi {
            return (0.5 * (lo + hi)).ln();
        }
        let top = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / top).collect();
    }
    panic!("oracle did not converge");
}

#[test]
fn large_context_spaces_match_power_oracle() {
    for (k, seeds) in [(4, (11, 12)), (5, (21, 22))] {
        let (m1, m2) = (order3(k, seeds.0), order3(k, seeds.1));
        let s1_of = |s2: f64| {
            let (mut a, mut b) = (-20.0, 5.0);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if ln_perron(&m1, &m2, mid, s2) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        };
        // golden section on the convex −s1(s2) − s2
        let g = |s2: f64| -s1_of(s2) - s2;
        let (mut a, mut b) = (-0.99, 0.5);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-7 {
            let (x1, x2) = (b - r * (b - a), a + r * (b - a));
            if g(x1) <= g(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let kappa = g(0.5 * (a + b));
        let sol = solve_kernel(&SchurKernel::new(&m1, &m2).unwrap()).unwrap();
        assert_eq!(sol.regime, Regime::InteriorSaddle, "k = {k}");
        assert!((sol.kappa.unwrap() - kappa).abs() <= 1e-6, "k = {k}: {:?} vs {kappa}", sol.kappa);
    }
}
