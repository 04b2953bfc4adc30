mod common;

use common::*;
use jcx_core::prefixcx::{compare_methods, recurrence_c, word_sum_c, WordSumConfig, WordSumPlan};

#[test]
fn recurrence_matches_word_sum_on_battery() {
    for (name, m1, m2) in battery() {
        for row in compare_methods(&m1, &m2, 12).unwrap() {
            assert!(
                row.difference <= 1e-6 + row.error_bound,
                "{name} n={} m={}: {} vs {} (bound {})",
                row.n,
                row.m,
                row.recurrence,
                row.word_sum,
                row.error_bound
            );
        }
    }
}

#[test]
fn swapping_sources_transposes_the_table() {
    for (name, m1, m2) in battery() {
        let a = recurrence_c(&m1, &m2, 10).unwrap();
        let b = recurrence_c(&m2, &m1, 10).unwrap();
        for n in 0..=10 {
            for m in 0..=10 {
                let (x, y) = (a.c(n, m), b.c(m, n));
                assert!((x - y).abs() <= 1e-12 * x.max(1.0), "{name} {n} {m}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn monotone_and_dominated_by_geometric_series() {
    for (name, m1, m2) in battery() {
        let t = recurrence_c(&m1, &m2, 12).unwrap();
        for n in 1..=12 {
            for m in 1..=12 {
                assert!(t.c(n, m) >= 0.0);
                assert!(t.c(n, m) + 1e-12 >= t.c(n - 1, m), "{name}");
                assert!(t.c(n, m) + 1e-12 >= t.c(n, m - 1), "{name}");
            }
        }
        let l12 = WordSumPlan::new(&m1, &m2).unwrap().lambda12();
        assert!(t.c(1, 1) <= 1.0 / (1.0 - l12) + 1e-12, "{name}");
    }
}

#[test]
fn smaller_threshold_stays_within_bound() {
    let (m1, m2) = (uniform2(), skewed());
    let coarse = word_sum_c(&m1, &m2, 1000, 1000, &WordSumConfig { tau: 0.5, ..Default::default() }).unwrap();
    let fine = word_sum_c(&m1, &m2, 1000, 1000, &WordSumConfig { tau: 0.01, ..Default::default() }).unwrap();
    assert!((coarse.value - fine.value).abs() <= coarse.error_bound + fine.error_bound + 1e-9 * fine.value);
    assert!(fine.nodes > coarse.nodes);
}

#[test]
fn identical_sources_grow_linearly() {
    let m = uniform2();
    let ws = word_sum_c(&m, &m, 100_000, 100_000, &WordSumConfig::default()).unwrap();
    let ratio = ws.value / (2.0 * 100_000.0 * std::f64::consts::LN_2 / m.entropy_rate());
    assert!((ratio - 1.0).abs() < 0.10, "{ratio}");
}
