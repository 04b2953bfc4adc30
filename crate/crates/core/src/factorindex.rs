//! Distinct-factor counting with suffix automata.
//!
//! `|I(X)|` counts the distinct factors of `X` including the empty word;
//! `J(X,Y)` counts the distinct factors common to both texts with the empty
//! word omitted (`j_excl`).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

#[derive(Debug, Clone)]
struct State {
    len: u32,
    link: u32,
    /// Sorted by symbol.
    next: Vec<(u32, u32)>,
}

impl State {
    #[inline]
    fn go(&self, c: u32) -> Option<u32> {
        self.next.binary_search_by_key(&c, |e| e.0).ok().map(|i| self.next[i].1)
    }

    fn set(&mut self, c: u32, to: u32) {
        match self.next.binary_search_by_key(&c, |e| e.0) {
            Ok(i) => self.next[i].1 = to,
            Err(i) => self.next.insert(i, (c, to)),
        }
    }
}

const NONE: u32 = u32::MAX;

/// Suffix automaton of a text. Built online in `O(n log |A|)` time; at most
/// `2n − 1` states for `n ≥ 2`.
#[derive(Debug, Clone)]
pub struct FactorIndex {
    states: Vec<State>,
    text_len: usize,
}

impl FactorIndex {
    pub fn build(text: &[u32]) -> Self {
        let mut states = Vec::with_capacity(2 * text.len() + 1);
        states.push(State { len: 0, link: NONE, next: Vec::new() });
        let mut last = 0u32;
        for &c in text {
            let cur = states.len() as u32;
            states.push(State { len: states[last as usize].len + 1, link: 0, next: Vec::new() });
            let mut p = last;
            while p != NONE && states[p as usize].go(c).is_none() {
                states[p as usize].set(c, cur);
                p = states[p as usize].link;
            }
            if p != NONE {
                let q = states[p as usize].go(c).unwrap();
                if states[p as usize].len + 1 == states[q as usize].len {
                    states[cur as usize].link = q;
                } else {
                    let clone = states.len() as u32;
                    let mut st = states[q as usize].clone();
                    st.len = states[p as usize].len + 1;
                    states.push(st);
                    while p != NONE && states[p as usize].go(c) == Some(q) {
                        states[p as usize].set(c, clone);
                        p = states[p as usize].link;
                    }
                    states[q as usize].link = clone;
                    states[cur as usize].link = clone;
                }
            }
            last = cur;
        }
        FactorIndex { states, text_len: text.len() }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn text_len(&self) -> usize {
        self.text_len
    }

    /// Number of distinct factors; `include_empty` adds the empty word.
    pub fn string_complexity(&self, include_empty: bool) -> u64 {
        let body: u64 = self.states[1..]
            .iter()
            .map(|s| (s.len - self.states[s.link as usize].len) as u64)
            .sum();
        body + include_empty as u64
    }

    /// Does `word` occur in the text?
    pub fn contains(&self, word: &[u32]) -> bool {
        let mut s = 0u32;
        for &c in word {
            match self.states[s as usize].go(c) {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }
}

/// Distinct common non-empty factors of the two indexed texts.
///
/// Walks the product automaton from the pair of initial states. Every
/// reachable pair `(p, q)` corresponds to a set of common factors, and
/// `count(p,q) = Σ_c [1 + count(δ(p,c), δ(q,c))]`; pair counts are memoized
/// so each pair is expanded once.
pub fn common_factor_count(x: &FactorIndex, y: &FactorIndex) -> u64 {
    struct Frame {
        p: u32,
        q: u32,
        edge: usize,
        acc: u64,
    }
    let mut memo: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut stack = vec![Frame { p: 0, q: 0, edge: 0, acc: 0 }];
    loop {
        let top = stack.len() - 1;
        let Frame { p, q, edge, .. } = stack[top];
        let xs = &x.states[p as usize];
        let ys = &y.states[q as usize];
        let mut descend = None;
        let mut e = edge;
        while e < xs.next.len() {
            let (c, p2) = xs.next[e];
            e += 1;
            if let Some(q2) = ys.go(c) {
                stack[top].acc += 1;
                match memo.get(&(p2, q2)) {
                    Some(&v) => stack[top].acc += v,
                    None => {
                        descend = Some((p2, q2));
                        break;
                    }
                }
            }
        }
        stack[top].edge = e;
        match descend {
            Some((p2, q2)) => stack.push(Frame { p: p2, q: q2, edge: 0, acc: 0 }),
            None => {
                let done = stack.pop().unwrap();
                match stack.last_mut() {
                    Some(parent) => {
                        memo.insert((done.p, done.q), done.acc);
                        parent.acc += done.acc;
                    }
                    None => return done.acc,
                }
            }
        }
    }
}

/// Result of comparing two texts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointReport {
    pub n: usize,
    pub m: usize,
    /// Common distinct non-empty factors.
    pub j_excl: u64,
    /// `j_excl + 1` (empty word counted).
    pub j_incl: u64,
    /// Discriminant, when both texts have length at least 2.
    pub d: Option<f64>,
    /// Set when the texts share no symbol (`d` is then 1 by convention).
    pub no_common: bool,
}

pub fn joint_complexity(x: &[u32], y: &[u32]) -> JointReport {
    joint_complexity_indexed(&FactorIndex::build(x), &FactorIndex::build(y))
}

pub fn joint_complexity_indexed(x: &FactorIndex, y: &FactorIndex) -> JointReport {
    let j = common_factor_count(x, y);
    let (n, m) = (x.text_len(), y.text_len());
    JointReport {
        n,
        m,
        j_excl: j,
        j_incl: j + 1,
        d: discriminant_from_count(j, n.min(m)).ok().map(|r| r.d),
        no_common: j == 0,
    }
}

/// `d(X,Y) = 1 − ln J / ln n` with its corner-case flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discriminant {
    pub d: f64,
    pub no_common: bool,
}

/// Discriminant of two texts; unequal lengths use the shorter one.
pub fn discriminant(x: &[u32], y: &[u32]) -> Result<Discriminant> {
    let n = x.len().min(y.len());
    if n < 2 {
        bail!(Input, "discriminant needs texts of length at least 2 (got {})", n);
    }
    discriminant_from_count(joint_complexity(x, y).j_excl, n)
}

/// `1 − ln j / ln n`; `j = 0` gives 1 with the `no_common` flag.
pub fn discriminant_from_count(j_excl: u64, n: usize) -> Result<Discriminant> {
    if n < 2 {
        bail!(Input, "discriminant needs n >= 2 (got {})", n);
    }
    if j_excl == 0 {
        return Ok(Discriminant { d: 1.0, no_common: true });
    }
    Ok(Discriminant { d: 1.0 - (j_excl as f64).ln() / (n as f64).ln(), no_common: false })
}
