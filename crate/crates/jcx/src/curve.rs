//! Complexity curves joining Monte Carlo, exact and asymptotic values.

use std::io::Write;

use jcx_core::asymptotics::profile;
use jcx_core::kernel::{solve_kernel, SchurKernel};
use jcx_core::prefixcx::{recurrence_c, WordSumConfig, WordSumPlan, DEFAULT_N_CAP};
use jcx_core::textmodel::MarkovModel;
use serde::Serialize;

use crate::error::Result;
use crate::montecarlo::{check_grid, check_pair, monte_carlo};

/// Declaration order is the row order within one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
pub enum Method {
    #[serde(rename = "exactMC")]
    #[value(name = "exactMC")]
    ExactMc,
    #[serde(rename = "recurrence")]
    Recurrence,
    #[serde(rename = "wordsum")]
    Wordsum,
    #[serde(rename = "predict")]
    Predict,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ExactMc, Method::Recurrence, Method::Wordsum, Method::Predict];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactMc => "exactMC",
            Method::Recurrence => "recurrence",
            Method::Wordsum => "wordsum",
            Method::Predict => "predict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub n: u64,
    pub method: Method,
    pub value: f64,
    /// Standard error (Monte Carlo), error bound (word sum), 0 (recurrence);
    /// absent for the asymptotic prediction.
    pub err: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComplexityCurve {
    pub rows: Vec<CurveRow>,
}

pub const CSV_COMMENT: &str = "# jcx complexity curve; all logarithms are natural";
pub const CSV_HEADER: [&str; 4] = ["n", "method", "value", "err"];

impl ComplexityCurve {
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| (r.n, r.method));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_COMMENT}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let err = r.err.map(crate::fmt_f64).unwrap_or_default();
            w.write_record([r.n.to_string(), r.method.as_str().into(), crate::fmt_f64(r.value), err])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Inputs of `montecarlo` and `curve`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub word_sum: WordSumConfig,
    /// Largest `n` evaluated by the recurrence.
    pub recurrence_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_grid: Vec::new(),
            trials: 10,
            seed: 0,
            methods: Method::ALL.to_vec(),
            word_sum: WordSumConfig::default(),
            recurrence_cap: 64,
        }
    }
}

pub fn complexity_curve(m1: &MarkovModel, m2: &MarkovModel, cfg: &ExperimentConfig) -> Result<ComplexityCurve> {
    check_pair(m1, m2)?;
    check_grid(&cfg.n_grid)?;
    let mut curve = ComplexityCurve::default();
    if cfg.n_grid.is_empty() {
        return Ok(curve);
    }
    let wants = |m| cfg.methods.contains(&m);

    if wants(Method::ExactMc) {
        for p in monte_carlo(m1, m2, &cfg.n_grid, cfg.trials, cfg.seed)? {
            curve.rows.push(CurveRow { n: p.n as u64, method: Method::ExactMc, value: p.mean, err: Some(p.stderr) });
        }
    }
    if wants(Method::Recurrence) {
        let cap = cfg.recurrence_cap.min(DEFAULT_N_CAP);
        let top = cfg.n_grid.iter().copied().filter(|&n| n <= cap).max();
        if let Some(top) = top {
            let table = recurrence_c(m1, m2, top)?;
            for &n in cfg.n_grid.iter().filter(|&&n| n <= top) {
                curve.rows.push(CurveRow { n: n as u64, method: Method::Recurrence, value: table.c(n, n), err: Some(0.0) });
            }
        }
    }
    if wants(Method::Wordsum) {
        let plan = WordSumPlan::new(m1, m2)?;
        for &n in &cfg.n_grid {
            let w = plan.evaluate(n as u64, n as u64, &cfg.word_sum)?;
            curve.rows.push(CurveRow { n: n as u64, method: Method::Wordsum, value: w.value, err: Some(w.error_bound) });
        }
    }
    if wants(Method::Predict) {
        let kernel = SchurKernel::new(m1, m2)?;
        let prof = profile(&kernel, &solve_kernel(&kernel)?)?;
        for &n in &cfg.n_grid {
            curve.rows.push(CurveRow { n: n as u64, method: Method::Predict, value: prof.predict(n as f64).value, err: None });
        }
    }
    curve.sort();
    Ok(curve)
}
