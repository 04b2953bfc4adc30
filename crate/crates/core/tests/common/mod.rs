#![allow(dead_code)]

use jcx_core::textmodel::MarkovModel;

pub fn binary(rows: &[&[f64]]) -> MarkovModel {
    MarkovModel::from_rows(["a", "b"], rows).unwrap()
}

pub fn uniform2() -> MarkovModel {
    binary(&[&[0.5, 0.5], &[0.5, 0.5]])
}

/// `c2 > 0` example: after `a` always `b`.
pub fn golden() -> MarkovModel {
    binary(&[&[0.0, 0.5], &[1.0, 0.5]])
}

/// `c2 < 0` example.
pub fn skewed() -> MarkovModel {
    binary(&[&[0.2, 0.8], &[0.8, 0.2]])
}

/// Two sources over {a,b,c} whose only shared transition is `a → b`.
pub fn nilpotent_pair() -> (MarkovModel, MarkovModel) {
    let s = ["a", "b", "c"];
    // P1: a→{a,b}, b→{b,c}, c→{c,a}
    let p1 = MarkovModel::from_rows(s, &[&[0.5, 0.0, 0.5], &[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]]).unwrap();
    // P2: a→{b,c}, b→a, c→b
    let p2 = MarkovModel::from_rows(s, &[&[0.0, 1.0, 0.0], &[0.5, 0.0, 1.0], &[0.5, 0.0, 0.0]]).unwrap();
    (p1, p2)
}

/// Distinct sources with equal transition probabilities wherever both are
/// positive.
pub fn conjugate_pair() -> (MarkovModel, MarkovModel) {
    let s = ["a", "b", "c", "d"];
    let p1 = MarkovModel::from_rows(
        s,
        &[
            &[0.0, 0.0, 0.625, 0.5],
            &[0.0, 0.125, 0.125, 0.25],
            &[0.5, 0.25, 0.25, 0.125],
            &[0.5, 0.625, 0.0, 0.125],
        ],
    )
    .unwrap();
    let p2 = MarkovModel::from_rows(
        s,
        &[
            &[0.5, 0.625, 0.0, 0.5],
            &[0.5, 0.125, 0.125, 0.25],
            &[0.0, 0.25, 0.25, 0.125],
            &[0.0, 0.0, 0.625, 0.125],
        ],
    )
    .unwrap();
    (p1, p2)
}

/// A fixed pair of unrelated full-support sources.
pub fn random_pair() -> (MarkovModel, MarkovModel) {
    let s = ["x", "y", "z"];
    let p1 = MarkovModel::from_rows(s, &[&[0.31, 0.12, 0.57], &[0.46, 0.33, 0.21], &[0.23, 0.55, 0.22]]).unwrap();
    let p2 = MarkovModel::from_rows(s, &[&[0.64, 0.27, 0.18], &[0.09, 0.41, 0.37], &[0.27, 0.32, 0.45]]).unwrap();
    (p1, p2)
}

/// The six pairs used for cross-checking the two `C_{n,m}` methods.
pub fn battery() -> Vec<(&'static str, MarkovModel, MarkovModel)> {
    let (n1, n2) = nilpotent_pair();
    let (c1, c2) = conjugate_pair();
    let (r1, r2) = random_pair();
    vec![
        ("identical", uniform2(), uniform2()),
        ("golden", uniform2(), golden()),
        ("skewed", uniform2(), skewed()),
        ("nilpotent", n1, n2),
        ("conjugate", c1, c2),
        ("random", r1, r2),
    ]
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
