use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn jcx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcx")).args(args).env_remove("JCX_STATE_CAP").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const UNIFORM: &str = r#"{"alphabet":["a","b"],"order":1,"transitions":[[0.5,0.5],[0.5,0.5]]}"#;
const SKEWED: &str = r#"{"alphabet":["a","b"],"order":1,"transitions":[[0.2,0.8],[0.8,0.2]]}"#;
const ALTERNATING: &str = r#"{"alphabet":["a","b"],"order":1,"transitions":[[0.0,1.0],[1.0,0.0]]}"#;

#[test]
fn fit_recovers_alternation() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.txt", "ababab\n");
    let v: serde_json::Value = serde_json::from_str(&stdout(&jcx(&["fit", s(&corpus), "--order", "1"]))).unwrap();
    assert_eq!(v["alphabet"], serde_json::json!(["a", "b"]));
    assert_eq!(v["transitions"], serde_json::json!([[0.0, 1.0], [1.0, 0.0]]));
}

#[test]
fn generate_is_deterministic_and_refits() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.json", SKEWED);
    let run = |seed: &str| stdout(&jcx(&["generate", "--model", s(&model), "--length", "1000000", "--seed", seed]));
    let text = run("7");
    assert_eq!(text, run("7"));
    assert_ne!(text, run("8"));
    assert_eq!(text.trim_end().len(), 1_000_000);
    let corpus = write(&dir, "g.txt", &text);
    let v: serde_json::Value = serde_json::from_str(&stdout(&jcx(&["fit", s(&corpus)]))).unwrap();
    let t = &v["transitions"];
    for (a, row) in [[0.2, 0.8], [0.8, 0.2]].iter().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            assert!((t[a][b].as_f64().unwrap() - p).abs() < 0.01, "{t}");
        }
    }
}

#[test]
fn montecarlo_output_is_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let (m1, m2) = (write(&dir, "u.json", UNIFORM), write(&dir, "s.json", SKEWED));
    let run = |threads: &str| {
        jcx(&[
            "montecarlo", "--model1", s(&m1), "--model2", s(&m2), "--n", "50,500,2000", "--trials", "8", "--seed", "3",
            "--threads", threads,
        ])
    };
    let one = stdout(&run("1"));
    assert_eq!(one, stdout(&run("1")));
    assert_eq!(one, stdout(&run("4")));
    assert_eq!(one.lines().count(), 5);
}

#[test]
fn curve_csv_layout() {
    let dir = TempDir::new().unwrap();
    let (m1, m2) = (write(&dir, "u.json", UNIFORM), write(&dir, "s.json", SKEWED));
    let out = stdout(&jcx(&["curve", "--model1", s(&m1), "--model2", s(&m2), "--n", "16,256", "--trials", "4"]));
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next(), Some("n,method,value,err"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // the recurrence stops at --recurrence-cap (64)
    assert_eq!(rows.len(), 7);
    assert!(!rows.iter().any(|r| r[0] == "256" && r[1] == "recurrence"));
    for r in rows.iter().filter(|r| r[1] == "wordsum") {
        let (value, err): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(err >= 0.0 && err < value);
    }
    assert!(rows.iter().filter(|r| r[1] == "predict").all(|r| r[3].is_empty()));

    let empty = stdout(&jcx(&["curve", "--model1", s(&m1), "--model2", s(&m2), "--n", ""]));
    assert_eq!(empty.lines().count(), 2);

    let file = dir.path().join("curve.csv");
    stdout(&jcx(&["curve", "--model1", s(&m1), "--model2", s(&m2), "--n", "16", "--out", s(&file)]));
    assert!(fs::read_to_string(file).unwrap().contains("exactMC"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"alphabet":["a","b"],"order":1,"transitions":[[0.5,0.5],[0.4,0.5]]}"#);
    let o = jcx(&["kernel", "--model1", s(&bad), "--model2", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column not stochastic"));

    let o = jcx(&["kernel", "--model1", "/nonexistent.json", "--model2", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));

    let corpus = write(&dir, "c.txt", "abcabc");
    let o = Command::new(env!("CARGO_BIN_EXE_jcx"))
        .args(["fit", s(&corpus), "--order", "3"])
        .env("JCX_STATE_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));

    let alt = write(&dir, "alt.json", ALTERNATING);
    let o = jcx(&["cnm", "--model1", s(&alt), "--model2", s(&alt), "--n", "10", "--m", "10", "--method", "wordsum"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn jc_counts_common_factors() {
    let dir = TempDir::new().unwrap();
    let (x, y) = (write(&dir, "x.txt", "aabaa"), write(&dir, "y.txt", "abbba"));
    let out = stdout(&jcx(&["jc", s(&x), s(&y), "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["j"], 4);
    let out = stdout(&jcx(&["jc", s(&x), s(&y), "--format", "json", "--include-empty"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["j"], 5);
}

#[test]
fn kernel_and_predict_reports() {
    let dir = TempDir::new().unwrap();
    let (m1, m2) = (write(&dir, "u.json", UNIFORM), write(&dir, "s.json", SKEWED));
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&jcx(&["kernel", "--model1", s(&m1), "--model2", s(&m2)]))).unwrap();
    assert_eq!(v["regime"], "InteriorSaddle");
    assert!((v["kappa"].as_f64().unwrap() - 0.923893).abs() < 1e-5);
    for key in ["c1", "c2", "c0", "exponent", "periodicity", "gamma0", "nilpotency_index", "unit_witness"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let out = stdout(&jcx(&["predict", "--model1", s(&m1), "--model2", s(&m2), "--n", "1000,1e6"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,regime,prediction,kappa_or_c0");
    assert!(lines[1].starts_with("1000,InteriorSaddle,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn discriminate_flags_identical_texts() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "the cat sat on the mat");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&jcx(&["discriminate", s(&x), s(&x), "--format", "json"]))).unwrap();
    assert_eq!(v["identical"], true);
}
