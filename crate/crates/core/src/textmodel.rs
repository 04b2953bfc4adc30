//! Order-r Markov sources over a finite alphabet.
//!
//! An order-r model is stored flattened to order 1 over the `|A|^r`
//! contexts. Context codes are base-`|A|` numbers with the oldest symbol
//! most significant, so emitting symbol `s` from context `b` moves to
//! context `(b·|A| + s) mod |A|^r`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{bail, Result};
use crate::util::{unit_f64, Sum};

/// Default ceiling on `|A|^r`; dense `S×S` matrices stay tractable below it.
pub const DEFAULT_STATE_CAP: usize = 4096;

const COLUMN_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Ordered set of distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Alphabet {
    /// Builds an alphabet, keeping the given order. Needs at least two
    /// distinct symbols.
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                bail!(Input, "duplicate symbol {:?} in alphabet", s);
            }
        }
        if symbols.len() < 2 {
            bail!(Input, "alphabet needs at least 2 symbols, got {}", symbols.len());
        }
        Ok(Alphabet { symbols, index })
    }

    /// Sorted distinct tokens of a corpus.
    pub fn from_tokens<'a, I>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let set: alloc::collections::BTreeSet<&str> = tokens.into_iter().collect();
        Self::new(set.into_iter().map(ToString::to_string))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: u32) -> &str {
        &self.symbols[i as usize]
    }

    pub fn index_of(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    /// Maps tokens to symbol indices; unknown tokens are an input error.
    pub fn encode<'a, I>(&self, tokens: I) -> Result<Vec<u32>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        tokens
            .into_iter()
            .enumerate()
            .map(|(pos, t)| match self.index_of(t) {
                Some(i) => Ok(i),
                None => bail!(Input, "symbol {:?} at position {} is not in the alphabet", t, pos),
            })
            .collect()
    }

    pub fn decode(&self, text: &[u32]) -> Vec<&str> {
        text.iter().map(|&i| self.symbol(i)).collect()
    }
}

/// `|A|^r`, or a capacity error above `cap`.
pub fn context_count(alphabet_len: usize, order: usize, cap: usize) -> Result<usize> {
    if order == 0 {
        bail!(Input, "order must be at least 1");
    }
    let mut s: usize = 1;
    for _ in 0..order {
        s = match s.checked_mul(alphabet_len) {
            Some(v) if v <= cap => v,
            _ => bail!(
                Capacity,
                "order {} over {} symbols exceeds the state cap of {}",
                order,
                alphabet_len,
                cap
            ),
        };
    }
    Ok(s)
}

/// A stationary order-r Markov source with column-stochastic transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    alphabet: Alphabet,
    order: usize,
    states: usize,
    transitions: Vec<f64>,
    stationary: Vec<f64>,
}

impl MarkovModel {
    /// `transitions` is row-major `S×S` with entry `[a·S + b] = P(a|b)`.
    /// The stationary law is computed.
    pub fn new(alphabet: Alphabet, order: usize, transitions: Vec<f64>) -> Result<Self> {
        Self::with_cap(alphabet, order, transitions, usize::MAX)
    }

    /// Like [`MarkovModel::new`] with an explicit state cap.
    pub fn with_cap(alphabet: Alphabet, order: usize, transitions: Vec<f64>, cap: usize) -> Result<Self> {
        let states = context_count(alphabet.len(), order, cap)?;
        validate_transitions(alphabet.len(), states, &transitions)?;
        let stationary = stationary(states, &transitions)?;
        Ok(MarkovModel { alphabet, order, states, transitions, stationary })
    }

    /// Uses a caller-supplied stationary vector after checking it.
    pub fn with_stationary(
        alphabet: Alphabet,
        order: usize,
        transitions: Vec<f64>,
        stationary: Vec<f64>,
    ) -> Result<Self> {
        let states = context_count(alphabet.len(), order, usize::MAX)?;
        validate_transitions(alphabet.len(), states, &transitions)?;
        if stationary.len() != states {
            bail!(Input, "stationary: expected {} entries, got {}", states, stationary.len());
        }
        let mut total = Sum::default();
        for (i, &p) in stationary.iter().enumerate() {
            if !(p.is_finite() && p >= 0.0) {
                bail!(Input, "stationary[{}] = {} is not a probability", i, p);
            }
            total.add(p);
        }
        if (total.value() - 1.0).abs() > 1e-10 {
            bail!(Input, "stationary: entries sum to {}, not 1", total.value());
        }
        let r = residual(states, &transitions, &stationary);
        if r > 1e-10 {
            bail!(Input, "stationary: not invariant under P (residual {:e})", r);
        }
        Ok(MarkovModel { alphabet, order, states, transitions, stationary })
    }

    /// Order-1 model from a row-major matrix `rows[a][b] = P(a|b)`.
    pub fn from_rows<S: Into<String>>(symbols: impl IntoIterator<Item = S>, rows: &[&[f64]]) -> Result<Self> {
        let alphabet = Alphabet::new(symbols)?;
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(alphabet, 1, flat)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of contexts `|A|^r`.
    pub fn num_states(&self) -> usize {
        self.states
    }

    /// `P(a|b)`.
    #[inline]
    pub fn p(&self, a: usize, b: usize) -> f64 {
        self.transitions[a * self.states + b]
    }

    /// Row-major `S×S` matrix, entry `[a·S + b] = P(a|b)`.
    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Context reached from `b` after emitting symbol `s`.
    #[inline]
    pub fn successor(&self, b: usize, s: usize) -> usize {
        (b * self.alphabet.len() + s) % self.states
    }

    /// Entropy rate in nats per symbol.
    pub fn entropy_rate(&self) -> f64 {
        let s = self.states;
        let mut h = Sum::default();
        for b in 0..s {
            let pb = self.stationary[b];
            if pb == 0.0 {
                continue;
            }
            for a in 0..s {
                let p = self.p(a, b);
                if p > 0.0 {
                    h.add(-pb * p * p.ln());
                }
            }
        }
        h.value().max(0.0)
    }
}

fn validate_transitions(k: usize, s: usize, t: &[f64]) -> Result<()> {
    if t.len() != s * s {
        bail!(Input, "transitions: expected {}x{} matrix, got {} entries", s, s, t.len());
    }
    for b in 0..s {
        let mut sum = Sum::default();
        for a in 0..s {
            let p = t[a * s + b];
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                bail!(Input, "transitions[{}][{}] = {} is outside [0, 1]", a, b, p);
            }
            if p > 0.0 && a != (b * k + a % k) % s {
                bail!(
                    Input,
                    "transitions[{}][{}] = {} links contexts that are not a one-symbol shift",
                    a,
                    b,
                    p
                );
            }
            sum.add(p);
        }
        if (sum.value() - 1.0).abs() > COLUMN_TOL {
            bail!(Input, "column not stochastic: column {} sums to {}", b, sum.value());
        }
    }
    Ok(())
}

fn sparse_columns(s: usize, t: &[f64]) -> Vec<Vec<(usize, f64)>> {
    (0..s)
        .map(|b| (0..s).filter(|&a| t[a * s + b] > 0.0).map(|a| (a, t[a * s + b])).collect())
        .collect()
}

fn apply(cols: &[Vec<(usize, f64)>], pi: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (b, col) in cols.iter().enumerate() {
        let w = pi[b];
        if w != 0.0 {
            for &(a, p) in col {
                out[a] += p * w;
            }
        }
    }
}

fn residual(s: usize, t: &[f64], pi: &[f64]) -> f64 {
    let cols = sparse_columns(s, t);
    let mut next = vec![0.0; s];
    apply(&cols, pi, &mut next);
    next.iter().zip(pi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Stationary law by lazy power iteration `π ← (π + Pπ)/2` from the uniform
/// vector. The lazy step makes periodic chains converge; for reducible
/// chains the result is the limit reached from uniform.
pub fn stationary(s: usize, transitions: &[f64]) -> Result<Vec<f64>> {
    let cols = sparse_columns(s, transitions);
    let mut pi = vec![1.0 / s as f64; s];
    let mut next = vec![0.0; s];
    let mut res = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITER {
        apply(&cols, &pi, &mut next);
        res = next.iter().zip(&pi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let mut total = 0.0;
        for (p, n) in pi.iter_mut().zip(&next) {
            *p = 0.5 * (*p + n);
            total += *p;
        }
        pi.iter_mut().for_each(|p| *p /= total);
        if res <= STATIONARY_TOL {
            return Ok(pi);
        }
    }
    bail!(
        Numeric,
        "stationary distribution did not converge after {} iterations (residual {:e})",
        STATIONARY_MAX_ITER,
        res
    )
}

/// Transition counts of a corpus: `count(context → symbol)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    order: usize,
    alphabet_len: usize,
    counts: Vec<u64>,
    total: u64,
}

impl CorpusStats {
    pub fn collect(alphabet_len: usize, corpus: &[u32], order: usize, cap: usize) -> Result<Self> {
        if corpus.is_empty() {
            bail!(Input, "empty corpus");
        }
        let s = context_count(alphabet_len, order, cap)?;
        if corpus.len() <= order {
            bail!(Input, "corpus of length {} is too short for order {}", corpus.len(), order);
        }
        if let Some(pos) = corpus.iter().position(|&c| c as usize >= alphabet_len) {
            bail!(Input, "symbol index {} at position {} is not in the alphabet", corpus[pos], pos);
        }
        let k = alphabet_len;
        let mut counts = vec![0u64; s * k];
        let mut ctx = corpus[..order].iter().fold(0usize, |c, &x| c * k + x as usize);
        for &x in &corpus[order..] {
            counts[ctx * k + x as usize] += 1;
            ctx = (ctx * k + x as usize) % s;
        }
        let total = (corpus.len() - order) as u64;
        Ok(CorpusStats { order, alphabet_len, counts, total })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn count(&self, context: usize, symbol: usize) -> u64 {
        self.counts[context * self.alphabet_len + symbol]
    }

    pub fn context_total(&self, context: usize) -> u64 {
        let k = self.alphabet_len;
        self.counts[context * k..(context + 1) * k].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Maximum-likelihood estimate with additive smoothing:
/// `P(a|b) = (count(b→a) + α) / (count(b) + α·|A|)`. With `α = 0`, contexts
/// never observed get a uniform column.
pub fn estimate(alphabet: &Alphabet, corpus: &[u32], order: usize, smoothing: f64) -> Result<MarkovModel> {
    estimate_capped(alphabet, corpus, order, smoothing, DEFAULT_STATE_CAP)
}

pub fn estimate_capped(
    alphabet: &Alphabet,
    corpus: &[u32],
    order: usize,
    smoothing: f64,
    cap: usize,
) -> Result<MarkovModel> {
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        bail!(Input, "smoothing must be a finite non-negative number, got {}", smoothing);
    }
    let k = alphabet.len();
    let stats = CorpusStats::collect(k, corpus, order, cap)?;
    let s = context_count(k, order, cap)?;
    let mut t = vec![0.0; s * s];
    for b in 0..s {
        let tot = stats.context_total(b);
        let denom = tot as f64 + smoothing * k as f64;
        for sym in 0..k {
            let a = (b * k + sym) % s;
            t[a * s + b] = if denom == 0.0 {
                1.0 / k as f64
            } else {
                (stats.count(b, sym) as f64 + smoothing) / denom
            };
        }
    }
    MarkovModel::with_cap(alphabet.clone(), order, t, cap)
}

/// Precomputed cumulative tables for sampling a model.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    model: &'a MarkovModel,
    initial: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a MarkovModel) -> Self {
        let k = model.alphabet.len();
        let s = model.states;
        let mut initial = Vec::with_capacity(s);
        let mut acc = 0.0;
        for &p in &model.stationary {
            acc += p;
            initial.push(acc);
        }
        let mut cumulative = vec![0.0; s * k];
        for b in 0..s {
            let mut acc = 0.0;
            for sym in 0..k {
                acc += model.p(model.successor(b, sym), b);
                cumulative[b * k + sym] = acc;
            }
        }
        Sampler { model, initial, cumulative }
    }

    /// `length` symbols following a context drawn from the stationary law.
    /// The initial context itself is not part of the output.
    pub fn sample<R: RngCore>(&self, length: usize, rng: &mut R) -> Vec<u32> {
        let u = unit_f64(rng) * self.initial[self.initial.len() - 1];
        let start = pick(&self.initial, u);
        self.sample_from(start, length, rng)
    }

    pub fn sample_from<R: RngCore>(&self, context: usize, length: usize, rng: &mut R) -> Vec<u32> {
        let k = self.model.alphabet.len();
        let mut out = Vec::with_capacity(length);
        let mut b = context;
        for _ in 0..length {
            let row = &self.cumulative[b * k..(b + 1) * k];
            let sym = pick(row, unit_f64(rng) * row[k - 1]);
            out.push(sym as u32);
            b = self.model.successor(b, sym);
        }
        out
    }
}

/// First index whose cumulative weight exceeds `u`, skipping zero-weight
/// entries when rounding pushes `u` past the end.
fn pick(cum: &[f64], u: f64) -> usize {
    let i = cum.partition_point(|&c| c <= u);
    if i < cum.len() {
        return i;
    }
    let last = cum[cum.len() - 1];
    cum.iter().position(|&c| c >= last).unwrap_or(cum.len() - 1)
}

/// Deterministic sample of `length` symbols for a given seed.
pub fn generate(model: &MarkovModel, length: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Sampler::new(model).sample(length, &mut rng)
}
