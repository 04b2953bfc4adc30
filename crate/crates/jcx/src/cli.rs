//! Argument parsing and command dispatch for the `jcx` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jcx_core::asymptotics::{profile, Constants};
use jcx_core::factorindex::FactorIndex;
use jcx_core::kernel::{solve_kernel, Axis, KernelSolution, Periodicity, SchurKernel};
use jcx_core::prefixcx::{recurrence_c, WordSumConfig, WordSumPlan};
use jcx_core::textmodel::{estimate_capped, generate, MarkovModel, DEFAULT_STATE_CAP};
use serde_json::{json, Value};

use crate::curve::{complexity_curve, ExperimentConfig, Method};
use crate::discriminate::discriminate;
use crate::error::{Error, Result};
use crate::model_io::{load_model, model_to_json, save_model};
use crate::tokenize::{encode_with_shared_alphabet, intern, Tokenizer};

#[derive(Debug, Parser)]
#[command(name = "jcx", version, about = "Joint string complexity of texts and Markov sources")]
pub struct Cli {
    /// Master seed for generation and Monte Carlo.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Largest number of Markov contexts `|A|^order` accepted.
    #[arg(long, global = true, env = "JCX_STATE_CAP", default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub model1: PathBuf,
    #[arg(long)]
    pub model2: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CnmMethod {
    Recurrence,
    Wordsum,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate an order-r Markov model from a corpus.
    Fit {
        corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Additive smoothing; 0 keeps unseen transitions at exactly 0.
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        #[arg(long, value_enum, default_value_t)]
        tokenizer: Tokenizer,
        /// Model file to write (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a text from a model.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        length: usize,
        /// Joins symbols: "" for bytes/chars, " " for words.
        #[arg(long, value_enum, default_value_t)]
        tokenizer: Tokenizer,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact joint complexity of two texts.
    Jc {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        tokenizer: Tokenizer,
        /// Count the empty word in `j`.
        #[arg(long)]
        include_empty: bool,
    },
    /// Joint prefix complexity C(n,m) by recurrence and/or word sum.
    Cnm {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(long, value_enum, default_value_t = CnmMethod::Both)]
        method: CnmMethod,
        /// Closed-form subtree threshold of the word sum.
        #[arg(long, default_value_t = WordSumConfig::default().tau)]
        tau: f64,
    },
    /// Solve the kernel equation and classify the pair (JSON).
    Kernel {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Leading-order asymptotic C(n,n).
    Predict {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<f64>,
        /// Include the periodic correction with |k|, |l| ≤ K.
        #[arg(long, default_value_t = 0)]
        q_terms: usize,
    },
    /// Monte Carlo mean of J(n,n) over generated pairs.
    Montecarlo {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Monte Carlo, recurrence, word sum and prediction in one table.
    Curve {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = Method::ALL)]
        methods: Vec<Method>,
        /// Largest n evaluated by the recurrence.
        #[arg(long, default_value_t = 64)]
        recurrence_cap: usize,
    },
    /// d(X,Y), optionally against the exponent of fitted models.
    Discriminate {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        tokenizer: Tokenizer,
        /// Fit order-r models to both texts and report 1 − κ.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Strictly increasing string lengths, comma separated (may be empty).
    #[arg(long, value_delimiter = ',', value_parser = grid_value)]
    pub n: Vec<Option<usize>>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--n ""` stands for the empty grid.
fn grid_value(s: &str) -> std::result::Result<Option<usize>, String> {
    if s.trim().is_empty() {
        return Ok(None);
    }
    s.trim().parse().map(Some).map_err(|e| format!("{e}"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn tokens(path: &Path, t: Tokenizer) -> Result<Vec<String>> {
    t.tokenize(&read(path)?)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => Ok(out.write_all(bytes)?),
    }
}

fn json_line(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json values serialize"))?;
    Ok(())
}

/// `null` for non-finite values, which JSON cannot carry.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn kernel_json(sol: &KernelSolution) -> Value {
    let periodicity = sol.periodicity.map(|p| match p {
        Periodicity::Punctual => json!({"kind": "punctual"}),
        Periodicity::Linear { axis, period } => json!({
            "kind": "linear",
            "axis": match axis { Axis::S1 => "s1", Axis::S2 => "s2" },
            "period": num(period),
        }),
        Periodicity::Lattice { period1, period2 } => {
            json!({"kind": "lattice", "period1": num(period1), "period2": num(period2)})
        }
    });
    json!({
        "regime": sol.regime.as_str(),
        "c1": opt(sol.c1),
        "c2": opt(sol.c2),
        "kappa": opt(sol.kappa),
        "c0": opt(sol.c0),
        "exponent": num(sol.exponent()),
        "periodicity": periodicity,
        "gamma0": opt(sol.gamma0),
        "nilpotency_index": sol.nilpotency_index,
        "unit_witness": sol.unit_witness,
    })
}

fn load_pair(pair: &PairArgs, cap: usize) -> Result<(MarkovModel, MarkovModel)> {
    Ok((load_model(&pair.model1, cap)?, load_model(&pair.model2, cap)?))
}

fn csv_rows(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let cap = cli.state_cap;
    match &cli.command {
        Command::Fit { corpus, order, smoothing, tokenizer, out: path } => {
            let toks = tokens(corpus, *tokenizer)?;
            let (alphabet, enc) = encode_with_shared_alphabet(&[&toks])?;
            let model = estimate_capped(&alphabet, &enc[0], *order, *smoothing, cap)?;
            match path {
                Some(p) => save_model(&model, p),
                None => emit(out, None, model_to_json(&model).as_bytes()),
            }
        }
        Command::Generate { model, length, tokenizer, out: path } => {
            let model = load_model(model, cap)?;
            let text = generate(&model, *length, cli.seed);
            let mut s = model.alphabet().decode(&text).join(tokenizer.separator());
            s.push('\n');
            emit(out, path.as_deref(), s.as_bytes())
        }
        Command::Jc { x, y, tokenizer, include_empty } => {
            let (tx, ty) = (tokens(x, *tokenizer)?, tokens(y, *tokenizer)?);
            let (_, enc) = intern(&[&tx, &ty]);
            let (ix, iy) = (FactorIndex::build(&enc[0]), FactorIndex::build(&enc[1]));
            let r = jcx_core::factorindex::joint_complexity_indexed(&ix, &iy);
            let j = if *include_empty { r.j_incl } else { r.j_excl };
            match cli.format {
                Format::Json => json_line(
                    out,
                    &json!({"n": r.n, "m": r.m, "j": j, "d": opt(r.d), "no_common": r.no_common}),
                ),
                Format::Csv => {
                    let d = r.d.map(crate::fmt_f64).unwrap_or_default();
                    csv_rows(out, &["n", "m", "j", "d"], &[vec![r.n.to_string(), r.m.to_string(), j.to_string(), d]])
                }
            }
        }
        Command::Cnm { pair, n, m, method, tau } => {
            let (m1, m2) = load_pair(pair, cap)?;
            let cfg = WordSumConfig { tau: *tau, ..WordSumConfig::default() };
            let table = if *method != CnmMethod::Wordsum {
                let top = n.iter().chain(m).copied().max().unwrap_or(0);
                Some(recurrence_c(&m1, &m2, usize::try_from(top).unwrap_or(usize::MAX))?)
            } else {
                None
            };
            let plan = if *method != CnmMethod::Recurrence { Some(WordSumPlan::new(&m1, &m2)?) } else { None };
            let mut rows = Vec::new();
            for &a in n {
                for &b in m {
                    if let Some(t) = &table {
                        rows.push((a, b, t.c(a as usize, b as usize), 0.0, "recurrence"));
                    }
                    if let Some(p) = &plan {
                        let w = if a == 0 || b == 0 {
                            jcx_core::prefixcx::WordSum { value: 0.0, error_bound: 0.0, nodes: 0 }
                        } else {
                            p.evaluate(a, b, &cfg)?
                        };
                        rows.push((a, b, w.value, w.error_bound, "wordsum"));
                    }
                }
            }
            match cli.format {
                Format::Json => json_line(
                    out,
                    &Value::Array(
                        rows.iter()
                            .map(|r| json!({"n": r.0, "m": r.1, "value": num(r.2), "error_bound": num(r.3), "method": r.4}))
                            .collect(),
                    ),
                ),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| vec![r.0.to_string(), r.1.to_string(), crate::fmt_f64(r.2), crate::fmt_f64(r.3), r.4.into()])
                        .collect();
                    csv_rows(out, &["n", "m", "value", "error_bound", "method"], &rows)
                }
            }
        }
        Command::Kernel { pair } => {
            let (m1, m2) = load_pair(pair, cap)?;
            let sol = solve_kernel(&SchurKernel::new(&m1, &m2)?)?;
            json_line(out, &kernel_json(&sol))
        }
        Command::Predict { pair, n, q_terms } => {
            let (m1, m2) = load_pair(pair, cap)?;
            let kernel = SchurKernel::new(&m1, &m2)?;
            let sol = solve_kernel(&kernel)?;
            let prof = profile(&kernel, &sol)?;
            for w in &prof.warnings {
                eprintln!("jcx: warning: {w}");
            }
            let kappa_or_c0 = match prof.constants {
                Constants::Boundary { c0, .. } => c0,
                _ => prof.exponent(),
            };
            let mut rows = Vec::new();
            for &x in n {
                if !(x >= 1.0) {
                    return Err(Error::Usage(format!("predict: n must be at least 1, got {x}")));
                }
                let p = prof.predict(x);
                let q = if *q_terms > 0 { x.powf(p.exponent) * prof.q_truncated(x.ln(), *q_terms, *q_terms) } else { 0.0 };
                rows.push((x, p.value + q));
            }
            match cli.format {
                Format::Json => json_line(
                    out,
                    &Value::Array(
                        rows.iter()
                            .map(|&(x, v)| {
                                json!({"n": num(x), "regime": sol.regime.as_str(), "prediction": num(v), "kappa_or_c0": num(kappa_or_c0)})
                            })
                            .collect(),
                    ),
                ),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|&(x, v)| vec![if x.fract() == 0.0 && x < 1e15 { format!("{x:.0}") } else { crate::fmt_f64(x) }, sol.regime.as_str().into(), crate::fmt_f64(v), crate::fmt_f64(kappa_or_c0)])
                        .collect();
                    csv_rows(out, &["n", "regime", "prediction", "kappa_or_c0"], &rows)
                }
            }
        }
        Command::Montecarlo { pair, exp } => {
            curve_command(cli, out, pair, exp, vec![Method::ExactMc], 0)
        }
        Command::Curve { pair, exp, methods, recurrence_cap } => {
            curve_command(cli, out, pair, exp, methods.clone(), *recurrence_cap)
        }
        Command::Discriminate { x, y, tokenizer, order, smoothing } => {
            let (tx, ty) = (tokens(x, *tokenizer)?, tokens(y, *tokenizer)?);
            let r = discriminate(&tx, &ty, order.map(|o| (o, *smoothing, cap)))?;
            match cli.format {
                Format::Json => json_line(out, &serde_json::to_value(&r).expect("report serializes")),
                Format::Csv => {
                    let (kappa, omk) = r
                        .models
                        .as_ref()
                        .map(|m| (crate::fmt_f64(m.kappa), crate::fmt_f64(m.one_minus_kappa)))
                        .unwrap_or_default();
                    csv_rows(
                        out,
                        &["n", "m", "j", "d", "no_common", "identical", "kappa", "one_minus_kappa"],
                        &[vec![
                            r.n.to_string(),
                            r.m.to_string(),
                            r.j.to_string(),
                            crate::fmt_f64(r.d),
                            r.no_common.to_string(),
                            r.identical.to_string(),
                            kappa,
                            omk,
                        ]],
                    )
                }
            }
        }
    }
}

fn curve_command(
    cli: &Cli,
    out: &mut dyn Write,
    pair: &PairArgs,
    exp: &ExperimentArgs,
    methods: Vec<Method>,
    recurrence_cap: usize,
) -> Result<()> {
    let (m1, m2) = load_pair(pair, cli.state_cap)?;
    let cfg = ExperimentConfig {
        n_grid: exp.n.iter().flatten().copied().collect(),
        trials: exp.trials,
        seed: cli.seed,
        methods,
        recurrence_cap,
        ..ExperimentConfig::default()
    };
    let curve = complexity_curve(&m1, &m2, &cfg)?;
    let mut buf = Vec::new();
    match cli.format {
        Format::Csv => curve.write_csv(&mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &curve).expect("curve serializes");
            buf.push(b'\n');
        }
    }
    emit(out, exp.out.as_deref(), &buf)
}
