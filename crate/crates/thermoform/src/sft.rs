//! Mixing subshifts of finite type with forbidden blocks of length 2.
//!
//! An [`Sft`] is a 0/1 transition matrix over a finite alphabet that is
//! primitive (some power is entrywise positive). The module provides the
//! combinatorial toolkit the rest of the crate builds on: language
//! enumeration and counting, mixing length, topological entropy, words
//! without long self-overlaps, and periodic orbits.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::TransferGraph;

/// Enumeration guard: refuse to materialize more words than this.
pub const ENUM_BUDGET: usize = 10_000_000;

/// A finite admissible word over the alphabet of an [`Sft`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Parse from a compact string like "0110" (symbols 0-9, then a-z).
    pub fn parse(s: &str) -> Result<Word> {
        let mut out = Vec::with_capacity(s.len());
        for c in s.chars() {
            let v = match c {
                '0'..='9' => c as u8 - b'0',
                'a'..='z' => c as u8 - b'a' + 10,
                _ => {
                    return Err(Error::Parse {
                        location: format!("word {s:?}"),
                        message: format!("invalid symbol {c:?}"),
                    })
                }
            };
            out.push(v);
        }
        Ok(Word(out))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            let c = if s < 10 {
                (b'0' + s) as char
            } else {
                (b'a' + s - 10) as char
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A primitive cyclically admissible word, identified up to rotation.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PeriodicOrbit {
    word: Word,
}

impl PeriodicOrbit {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }
}

#[derive(Deserialize)]
struct SftSpecFile {
    alphabet: usize,
    #[serde(default)]
    matrix: Option<Vec<Vec<u8>>>,
    #[serde(default)]
    allowed: Option<Vec<[usize; 2]>>,
}

/// A mixing subshift of finite type.
///
/// Immutable after construction; all operations are pure.
#[derive(Clone, Debug)]
pub struct Sft {
    alphabet_size: usize,
    transitions: Vec<bool>,
    mixing_length: usize,
}

impl Sft {
    pub fn new(alphabet_size: usize, rows: &[Vec<u8>]) -> Result<Sft> {
        if alphabet_size == 0 || alphabet_size > 128 {
            return Err(Error::OutOfRange(format!(
                "alphabet size {alphabet_size} outside 1..=128"
            )));
        }
        if rows.len() != alphabet_size || rows.iter().any(|r| r.len() != alphabet_size) {
            return Err(Error::Parse {
                location: "matrix".into(),
                message: format!("expected a {alphabet_size}x{alphabet_size} matrix"),
            });
        }
        let mut transitions = vec![false; alphabet_size * alphabet_size];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => transitions[i * alphabet_size + j] = true,
                    _ => {
                        return Err(Error::Parse {
                            location: format!("matrix[{i}][{j}]"),
                            message: format!("entries must be 0 or 1, got {v}"),
                        })
                    }
                }
            }
        }
        // no stranded symbols
        for a in 0..alphabet_size {
            let row_ok = (0..alphabet_size).any(|b| transitions[a * alphabet_size + b]);
            let col_ok = (0..alphabet_size).any(|b| transitions[b * alphabet_size + a]);
            if !row_ok || !col_ok {
                return Err(Error::NotMixing);
            }
        }
        let mixing_length = primitivity_index(alphabet_size, &transitions).ok_or(Error::NotMixing)?;
        Ok(Sft {
            alphabet_size,
            transitions,
            mixing_length,
        })
    }

    pub fn from_allowed(alphabet_size: usize, pairs: &[[usize; 2]]) -> Result<Sft> {
        let mut rows = vec![vec![0u8; alphabet_size]; alphabet_size];
        for &[i, j] in pairs {
            if i >= alphabet_size || j >= alphabet_size {
                return Err(Error::Parse {
                    location: format!("allowed pair [{i},{j}]"),
                    message: "symbol out of range".into(),
                });
            }
            rows[i][j] = 1;
        }
        Sft::new(alphabet_size, &rows)
    }

    /// Parse the structured spec format: `{"alphabet": k, "matrix": [[..]]}`
    /// or `{"alphabet": k, "allowed": [[i,j], ..]}`.
    pub fn parse(text: &str) -> Result<Sft> {
        let spec: SftSpecFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        match (spec.matrix, spec.allowed) {
            (Some(m), None) => Sft::new(spec.alphabet, &m),
            (None, Some(p)) => Sft::from_allowed(spec.alphabet, &p),
            _ => Err(Error::Parse {
                location: "spec".into(),
                message: "need exactly one of \"matrix\" or \"allowed\"".into(),
            }),
        }
    }

    pub fn full_shift(k: usize) -> Sft {
        Sft::new(k, &vec![vec![1u8; k]; k]).expect("full shift is mixing")
    }

    pub fn golden_mean() -> Sft {
        Sft::new(2, &[vec![1, 1], vec![1, 0]]).expect("golden mean is mixing")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    #[inline]
    pub fn allowed(&self, a: u8, b: u8) -> bool {
        self.transitions[a as usize * self.alphabet_size + b as usize]
    }

    /// Smallest L >= 1 such that every boolean power `transitions^n` with
    /// n >= L is entrywise positive (the primitivity index).
    pub fn mixing_length(&self) -> usize {
        self.mixing_length
    }

    pub fn is_full_shift(&self) -> bool {
        self.transitions.iter().all(|&b| b)
    }

    pub fn is_admissible(&self, symbols: &[u8]) -> bool {
        if symbols.iter().any(|&s| s as usize >= self.alphabet_size) {
            return false;
        }
        symbols.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    /// Number of admissible words of length n (entrywise sum of `transitions^(n-1)`).
    pub fn word_count(&self, n: usize) -> BigUint {
        let k = self.alphabet_size;
        if n == 0 {
            return BigUint::from(1u32);
        }
        let mut counts: Vec<BigUint> = vec![BigUint::from(1u32); k];
        for _ in 1..n {
            let mut next: Vec<BigUint> = vec![BigUint::from(0u32); k];
            for a in 0..k {
                if counts[a] == BigUint::from(0u32) {
                    continue;
                }
                for b in 0..k {
                    if self.transitions[a * k + b] {
                        next[b] += &counts[a];
                    }
                }
            }
            counts = next;
        }
        counts.into_iter().sum()
    }

    fn word_count_within(&self, n: usize, cap: usize) -> Option<usize> {
        let acc = self.word_count(n);
        if acc <= BigUint::from(cap) {
            let digits = acc.iter_u64_digits().collect::<Vec<_>>();
            Some(digits.first().copied().unwrap_or(0) as usize)
        } else {
            None
        }
    }

    /// All admissible words of length n in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Result<Vec<Word>> {
        let count = self
            .word_count_within(n, ENUM_BUDGET)
            .ok_or(Error::TooLarge {
                what: "word enumeration",
                size: usize::MAX,
                budget: ENUM_BUDGET,
            })?;
        let mut out = Vec::with_capacity(count);
        let mut stack = Vec::with_capacity(n);
        self.enum_rec(n, &mut stack, &mut out);
        Ok(out)
    }

    fn enum_rec(&self, n: usize, stack: &mut Vec<u8>, out: &mut Vec<Word>) {
        if stack.len() == n {
            out.push(Word(stack.clone()));
            return;
        }
        for b in 0..self.alphabet_size as u8 {
            if stack.last().map_or(true, |&a| self.allowed(a, b)) {
                stack.push(b);
                self.enum_rec(n, stack, out);
                stack.pop();
            }
        }
    }

    /// The lexicographically first `limit` admissible words of length n.
    pub fn first_words(&self, n: usize, limit: usize) -> Vec<Word> {
        let mut out = Vec::with_capacity(limit);
        let mut stack = Vec::with_capacity(n);
        self.first_rec(n, limit, &mut stack, &mut out);
        out
    }

    fn first_rec(&self, n: usize, limit: usize, stack: &mut Vec<u8>, out: &mut Vec<Word>) {
        if out.len() >= limit {
            return;
        }
        if stack.len() == n {
            out.push(Word(stack.clone()));
            return;
        }
        for b in 0..self.alphabet_size as u8 {
            if out.len() >= limit {
                return;
            }
            if stack.last().map_or(true, |&a| self.allowed(a, b)) {
                stack.push(b);
                self.first_rec(n, limit, stack, out);
                stack.pop();
            }
        }
    }

    /// Log of the Perron eigenvalue of the transition matrix, in nats.
    pub fn topological_entropy(&self) -> f64 {
        let g = TransferGraph::from_adjacency(self);
        g.log_perron(0.0, None)
            .expect("primitive adjacency matrix converges")
            .log_lambda
    }

    /// A connecting word w of length n with `a w b` admissible, if one exists.
    pub fn connecting_word(&self, a: u8, b: u8, n: usize) -> Option<Word> {
        let mut stack = Vec::with_capacity(n);
        if self.connect_rec(a, b, n, &mut stack) {
            Some(Word(stack))
        } else {
            None
        }
    }

    fn connect_rec(&self, prev: u8, target: u8, remaining: usize, stack: &mut Vec<u8>) -> bool {
        if remaining == 0 {
            return self.allowed(prev, target);
        }
        for s in 0..self.alphabet_size as u8 {
            if self.allowed(prev, s) {
                stack.push(s);
                if self.connect_rec(s, target, remaining - 1, stack) {
                    return true;
                }
                stack.pop();
            }
        }
        false
    }

    /// Lexicographically least admissible word of length >= min_len with no
    /// long self-overlaps: no j with 1 <= j < 2|w|/3 has the length-(|w|-j)
    /// prefix equal to the length-(|w|-j) suffix.
    pub fn find_no_overlap_word(&self, min_len: usize) -> Result<Word> {
        if min_len < 3 * self.mixing_length {
            return Err(Error::OutOfRange(format!(
                "min_len {min_len} below 3*mixing_length = {}",
                3 * self.mixing_length
            )));
        }
        let budget = min_len + 24;
        for len in min_len..=budget {
            let mut stack = Vec::with_capacity(len);
            if let Some(w) = self.no_overlap_rec(len, &mut stack) {
                return Ok(w);
            }
        }
        Err(Error::SearchExhausted(budget))
    }

    fn no_overlap_rec(&self, len: usize, stack: &mut Vec<u8>) -> Option<Word> {
        if stack.len() == len {
            return if has_no_long_overlap(stack) {
                Some(Word(stack.clone()))
            } else {
                None
            };
        }
        for s in 0..self.alphabet_size as u8 {
            if stack.last().map_or(true, |&a| self.allowed(a, s)) {
                stack.push(s);
                if let Some(w) = self.no_overlap_rec(len, stack) {
                    return Some(w);
                }
                stack.pop();
            }
        }
        None
    }

    /// All primitive cyclically admissible words up to rotation, periods
    /// 1..=max_period.
    pub fn periodic_orbits(&self, max_period: usize) -> Result<Vec<PeriodicOrbit>> {
        if max_period > 16 {
            return Err(Error::OutOfRange(format!(
                "max_period {max_period} exceeds 16"
            )));
        }
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut out = Vec::new();
        for p in 1..=max_period {
            let mut stack = Vec::with_capacity(p);
            self.cyclic_rec(p, &mut stack, &mut seen, &mut out);
        }
        Ok(out)
    }

    fn cyclic_rec(
        &self,
        p: usize,
        stack: &mut Vec<u8>,
        seen: &mut HashSet<Vec<u8>>,
        out: &mut Vec<PeriodicOrbit>,
    ) {
        if stack.len() == p {
            if self.allowed(stack[p - 1], stack[0]) && is_primitive_word(stack) {
                let canon = min_rotation(stack);
                if seen.insert(canon.clone()) {
                    out.push(PeriodicOrbit { word: Word(canon) });
                }
            }
            return;
        }
        for s in 0..self.alphabet_size as u8 {
            if stack.last().map_or(true, |&a| self.allowed(a, s)) {
                stack.push(s);
                self.cyclic_rec(p, stack, seen, out);
                stack.pop();
            }
        }
    }
}

/// True when no prefix of length |w|-j recurs as the suffix, for
/// 1 <= j < 2|w|/3.
pub fn has_no_long_overlap(w: &[u8]) -> bool {
    let m = w.len();
    for j in 1.. {
        if 3 * j >= 2 * m {
            break;
        }
        if w[..m - j] == w[j..] {
            return false;
        }
    }
    true
}

fn is_primitive_word(w: &[u8]) -> bool {
    let n = w.len();
    for d in 1..n {
        if n % d == 0 && w.iter().enumerate().all(|(i, &s)| s == w[i % d]) {
            return false;
        }
    }
    true
}

fn min_rotation(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    let mut best: Option<Vec<u8>> = None;
    for r in 0..n {
        let rot: Vec<u8> = (0..n).map(|i| w[(i + r) % n]).collect();
        if best.as_ref().map_or(true, |b| &rot < b) {
            best = Some(rot);
        }
    }
    best.unwrap()
}

/// Smallest L with the L-th boolean power entrywise positive, searched up to
/// the Wielandt bound (k-1)^2 + 1. None when the matrix is not primitive.
fn primitivity_index(k: usize, transitions: &[bool]) -> Option<usize> {
    let bound = (k - 1) * (k - 1) + 1;
    let mut power = transitions.to_vec();
    for l in 1..=bound {
        if power.iter().all(|&b| b) {
            return Some(l);
        }
        let mut next = vec![false; k * k];
        for a in 0..k {
            for m in 0..k {
                if power[a * k + m] {
                    for b in 0..k {
                        if transitions[m * k + b] {
                            next[a * k + b] = true;
                        }
                    }
                }
            }
        }
        power = next;
    }
    if power.iter().all(|&b| b) {
        Some(bound)
    } else {
        None
    }
}
