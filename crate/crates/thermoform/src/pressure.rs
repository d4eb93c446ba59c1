//! Pressure, equilibrium states and Gibbs-constant measurement.
//!
//! The pressure p(t) = log lambda(t) of the transfer operator for t*phi is
//! computed with a certified Collatz-Wielandt bracket, widened by
//! |t| * truncation_error so the reported enclosure also covers the
//! distance to the intended Hölder potential. Full-shift depth-1 tables
//! take a closed-form log-sum-exp path; the large-depth distance tables
//! run on their lumped automata (see [`crate::graph`]); everything else
//! runs on the explicit word graph.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Perron, TransferGraph};
use crate::potential::{LocallyConstantPotential, TableRepr};
use crate::sft::{Sft, Word};

/// A pressure value with a certified enclosure half-width.
#[derive(Clone, Copy, Debug)]
pub struct PressureValue {
    pub value: f64,
    pub enclosure: f64,
}

/// Reusable engine for a fixed (sft, potential) pair; warm-starts the
/// power iteration across a t-grid.
pub struct PressureEngine {
    kind: EngineKind,
    truncation_error: f64,
    warm: Option<Vec<f64>>,
}

enum EngineKind {
    /// Full shift, depth-1 table: lambda(t) = sum_a exp(t c_a).
    Rank1 { values: Vec<f64> },
    Graph { graph: TransferGraph },
}

impl PressureEngine {
    pub fn new(sft: &Sft, pot: &LocallyConstantPotential) -> Result<PressureEngine> {
        let kind = match &pot.repr {
            TableRepr::Dense { values, .. } if pot.depth() == 1 && sft.is_full_shift() => {
                EngineKind::Rank1 {
                    values: values.clone(),
                }
            }
            TableRepr::Dense { .. } => EngineKind::Graph {
                graph: TransferGraph::word_graph(sft, pot)?,
            },
            TableRepr::Sunny { radius } => EngineKind::Graph {
                graph: TransferGraph::sunny_automaton(sft, *radius)?,
            },
            TableRepr::OrbitFixed {
                symbol: _,
                alphabet,
                a,
                alpha,
                radius,
            } => EngineKind::Graph {
                graph: TransferGraph::orbit_fixed_automaton(*alphabet, *a, *alpha, *radius),
            },
        };
        Ok(PressureEngine {
            kind,
            truncation_error: pot.truncation_error,
            warm: None,
        })
    }

    /// The transfer graph behind this engine, when there is one.
    pub fn graph(&self) -> Option<&TransferGraph> {
        match &self.kind {
            EngineKind::Graph { graph } => Some(graph),
            EngineKind::Rank1 { .. } => None,
        }
    }

    pub fn pressure(&mut self, t: f64) -> Result<PressureValue> {
        match &self.kind {
            EngineKind::Rank1 { values } => {
                let value = logsumexp(values.iter().map(|&c| t * c));
                Ok(PressureValue {
                    value,
                    enclosure: 4.0 * f64::EPSILON * (1.0 + value.abs())
                        + t.abs() * self.truncation_error,
                })
            }
            EngineKind::Graph { graph } => {
                let p = graph.log_perron(t, self.warm.as_deref())?;
                self.warm = Some(p.right_log.clone());
                Ok(PressureValue {
                    value: p.log_lambda,
                    enclosure: p.halfwidth + t.abs() * self.truncation_error,
                })
            }
        }
    }
}

/// Topological pressure of t*phi.
pub fn pressure(sft: &Sft, pot: &LocallyConstantPotential, t: f64) -> Result<PressureValue> {
    PressureEngine::new(sft, pot)?.pressure(t)
}

pub fn logsumexp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = terms.into_iter().collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Equilibrium { t: f64 },
    Explicit,
}

/// A stationary order-k Markov chain on the admissible k-words of an SFT.
#[derive(Clone, Debug)]
pub struct MarkovMeasure {
    order: usize,
    words: Vec<Word>,
    index: HashMap<Box<[u8]>, u32>,
    out_start: Vec<u32>,
    out_to: Vec<u32>,
    out_prob: Vec<f64>,
    out_symbol: Vec<u8>,
    pi: Vec<f64>,
    pub provenance: Provenance,
}

impl MarkovMeasure {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn states(&self) -> &[Word] {
        &self.words
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    fn from_parts(
        words: Vec<Word>,
        out_start: Vec<u32>,
        out_to: Vec<u32>,
        out_prob: Vec<f64>,
        out_symbol: Vec<u8>,
        pi: Vec<f64>,
        provenance: Provenance,
    ) -> MarkovMeasure {
        let order = words.first().map_or(0, |w| w.len());
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.symbols().to_vec().into_boxed_slice(), i as u32))
            .collect();
        let mut m = MarkovMeasure {
            order,
            words,
            index,
            out_start,
            out_to,
            out_prob,
            out_symbol,
            pi,
            provenance,
        };
        m.settle_stationary();
        m
    }

    /// Polish pi to stationarity (the chain is irreducible in our uses, so
    /// repeated application of the transition operator converges).
    fn settle_stationary(&mut self) {
        let n = self.words.len();
        let mut next = vec![0.0; n];
        for _ in 0..200 {
            next.iter_mut().for_each(|x| *x = 0.0);
            for u in 0..n {
                let lo = self.out_start[u] as usize;
                let hi = self.out_start[u + 1] as usize;
                for e in lo..hi {
                    next[self.out_to[e] as usize] += self.pi[u] * self.out_prob[e];
                }
            }
            let total: f64 = next.iter().sum();
            let mut delta = 0.0f64;
            for v in 0..n {
                next[v] /= total;
                delta = delta.max((next[v] - self.pi[v]).abs());
            }
            std::mem::swap(&mut self.pi, &mut next);
            if delta < 1e-16 {
                break;
            }
        }
    }

    /// Product (Bernoulli) measure on a full shift, lifted to order-k states.
    pub fn bernoulli(sft: &Sft, probs: &[f64], order: usize) -> Result<MarkovMeasure> {
        if !sft.is_full_shift() || probs.len() != sft.alphabet_size() {
            return Err(Error::OutOfRange(
                "bernoulli helper needs a full shift and one probability per symbol".into(),
            ));
        }
        let words = sft.enumerate_words(order)?;
        let pi: Vec<f64> = words
            .iter()
            .map(|w| w.symbols().iter().map(|&s| probs[s as usize]).product())
            .collect();
        let mut out_start = vec![0u32; words.len() + 1];
        let mut out_to = Vec::new();
        let mut out_prob = Vec::new();
        let mut out_symbol = Vec::new();
        let index: HashMap<&[u8], u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.symbols(), i as u32))
            .collect();
        for (i, w) in words.iter().enumerate() {
            for s in 0..sft.alphabet_size() as u8 {
                let mut key = w.symbols()[1..].to_vec();
                key.push(s);
                out_to.push(index[key.as_slice()]);
                out_prob.push(probs[s as usize]);
                out_symbol.push(s);
            }
            out_start[i + 1] = out_to.len() as u32;
        }
        Ok(MarkovMeasure::from_parts(
            words,
            out_start,
            out_to,
            out_prob,
            out_symbol,
            pi,
            Provenance::Explicit,
        ))
    }

    /// Point mass on a periodic orbit, as a degenerate order-k chain.
    pub fn point_mass(sft: &Sft, orbit: &Word, order: usize) -> Result<MarkovMeasure> {
        let p = orbit.symbols();
        if !sft.is_admissible(p) || !sft.allowed(p[p.len() - 1], p[0]) {
            return Err(Error::Inadmissible(orbit.to_string()));
        }
        let k = p.len();
        let mut words: Vec<Word> = Vec::new();
        let mut phase_of: Vec<usize> = Vec::new();
        let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
        for j in 0..k {
            let w: Vec<u8> = (0..order).map(|i| p[(j + i) % k]).collect();
            if !seen.contains_key(&w) {
                seen.insert(w.clone(), words.len());
                words.push(Word(w));
                phase_of.push(j);
            }
        }
        let n = words.len();
        let mut out_start = vec![0u32; n + 1];
        let mut out_to = Vec::new();
        let mut out_prob = Vec::new();
        let mut out_symbol = Vec::new();
        for (i, _) in words.iter().enumerate() {
            let j = phase_of[i];
            let next: Vec<u8> = (0..order).map(|i2| p[(j + 1 + i2) % k]).collect();
            let sym = next[order - 1];
            let to = seen[&next] as u32;
            out_to.push(to);
            out_prob.push(1.0);
            out_symbol.push(sym);
            out_start[i + 1] = out_to.len() as u32;
        }
        let pi = vec![1.0 / n as f64; n];
        Ok(MarkovMeasure::from_parts(
            words,
            out_start,
            out_to,
            out_prob,
            out_symbol,
            pi,
            Provenance::Explicit,
        ))
    }

    /// Conditional entropy rate -sum_u pi_u sum_v P_uv log P_uv, exact.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for u in 0..self.words.len() {
            let lo = self.out_start[u] as usize;
            let hi = self.out_start[u + 1] as usize;
            let mut row = 0.0;
            for e in lo..hi {
                let p = self.out_prob[e];
                if p > 0.0 {
                    row -= p * p.ln();
                }
            }
            h += self.pi[u] * row;
        }
        h
    }

    /// Integral of a depth-k table against the measure; the measure's order
    /// must be at least the depth (refine first otherwise).
    pub fn integral(&self, pot: &LocallyConstantPotential) -> Result<f64> {
        if pot.depth() > self.order {
            return Err(Error::OrderMismatch {
                order: self.order,
                depth: pot.depth(),
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&self.pi)
            .map(|(w, &p)| p * pot.value_of_window(&w.symbols()[..pot.depth()]))
            .sum())
    }

    /// Lift to a higher order; the refined chain represents the same measure.
    pub fn refine_to(&self, order: usize) -> Result<MarkovMeasure> {
        if order < self.order {
            return Err(Error::OrderMismatch {
                order,
                depth: self.order,
            });
        }
        if order == self.order {
            return Ok(self.clone());
        }
        // enumerate extensions of each state by DFS over transitions
        let mut words: Vec<Word> = Vec::new();
        let mut pis: Vec<f64> = Vec::new();
        let mut stack: Vec<(u32, Vec<u8>, f64)> = Vec::new();
        for (i, w) in self.words.iter().enumerate() {
            stack.push((i as u32, w.symbols().to_vec(), self.pi[i]));
        }
        while let Some((state, syms, mass)) = stack.pop() {
            if syms.len() == order {
                if mass > 0.0 {
                    words.push(Word(syms));
                    pis.push(mass);
                }
                continue;
            }
            let lo = self.out_start[state as usize] as usize;
            let hi = self.out_start[state as usize + 1] as usize;
            for e in lo..hi {
                if self.out_prob[e] == 0.0 {
                    continue;
                }
                let mut next = syms.clone();
                next.push(self.out_symbol[e]);
                stack.push((self.out_to[e], next, mass * self.out_prob[e]));
            }
        }
        let mut pairs: Vec<(Word, f64)> = words.into_iter().zip(pis).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let words: Vec<Word> = pairs.iter().map(|(w, _)| w.clone()).collect();
        let pi: Vec<f64> = pairs.iter().map(|&(_, p)| p).collect();
        let index: HashMap<&[u8], u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.symbols(), i as u32))
            .collect();
        // transitions read off the suffix state of the original chain
        let mut out_start = vec![0u32; words.len() + 1];
        let mut out_to = Vec::new();
        let mut out_prob = Vec::new();
        let mut out_symbol = Vec::new();
        for (i, w) in words.iter().enumerate() {
            let suffix = &w.symbols()[order - self.order..];
            let su = self.index[suffix] as usize;
            let lo = self.out_start[su] as usize;
            let hi = self.out_start[su + 1] as usize;
            for e in lo..hi {
                if self.out_prob[e] == 0.0 {
                    continue;
                }
                let mut key = w.symbols()[1..].to_vec();
                key.push(self.out_symbol[e]);
                if let Some(&to) = index.get(key.as_slice()) {
                    out_to.push(to);
                    out_prob.push(self.out_prob[e]);
                    out_symbol.push(self.out_symbol[e]);
                }
            }
            out_start[i + 1] = out_to.len() as u32;
        }
        Ok(MarkovMeasure::from_parts(
            words,
            out_start,
            out_to,
            out_prob,
            out_symbol,
            pi,
            self.provenance.clone(),
        ))
    }

    /// Natural log of the cylinder measure of a word.
    pub fn log_cylinder(&self, symbols: &[u8]) -> f64 {
        let n = symbols.len();
        if n < self.order {
            let mass: f64 = self
                .words
                .iter()
                .zip(&self.pi)
                .filter(|(w, _)| &w.symbols()[..n] == symbols)
                .map(|(_, &p)| p)
                .sum();
            return mass.ln();
        }
        let Some(&start) = self.index.get(&symbols[..self.order]) else {
            return f64::NEG_INFINITY;
        };
        let mut acc = self.pi[start as usize].ln();
        let mut cur = start;
        for &s in &symbols[self.order..] {
            let lo = self.out_start[cur as usize] as usize;
            let hi = self.out_start[cur as usize + 1] as usize;
            let mut found = false;
            for e in lo..hi {
                if self.out_symbol[e] == s && self.out_prob[e] > 0.0 {
                    acc += self.out_prob[e].ln();
                    cur = self.out_to[e];
                    found = true;
                    break;
                }
            }
            if !found {
                return f64::NEG_INFINITY;
            }
        }
        acc
    }

    pub fn cylinder(&self, w: &Word) -> f64 {
        self.log_cylinder(w.symbols()).exp()
    }

    /// Sample a symbol path of the given length.
    pub fn sample(&self, len: usize, rng: &mut impl rand::Rng) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        // initial state from pi
        let mut acc = 0.0;
        let draw: f64 = rng.gen();
        let mut cur = 0u32;
        for (i, &p) in self.pi.iter().enumerate() {
            acc += p;
            if draw <= acc {
                cur = i as u32;
                break;
            }
            cur = i as u32;
        }
        out.extend_from_slice(self.words[cur as usize].symbols());
        while out.len() < len {
            let lo = self.out_start[cur as usize] as usize;
            let hi = self.out_start[cur as usize + 1] as usize;
            let draw: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = hi - 1;
            for e in lo..hi {
                acc += self.out_prob[e];
                if draw <= acc {
                    chosen = e;
                    break;
                }
            }
            out.push(self.out_symbol[chosen]);
            cur = self.out_to[chosen];
        }
        out.truncate(len);
        out
    }

    /// Greatest row-sum deviation from 1 and stationarity defect, for tests.
    pub fn validate(&self) -> (f64, f64) {
        let n = self.words.len();
        let mut row_defect = 0.0f64;
        for u in 0..n {
            let lo = self.out_start[u] as usize;
            let hi = self.out_start[u + 1] as usize;
            let sum: f64 = self.out_prob[lo..hi].iter().sum();
            row_defect = row_defect.max((sum - 1.0).abs());
        }
        let mut stat = vec![0.0; n];
        for u in 0..n {
            let lo = self.out_start[u] as usize;
            let hi = self.out_start[u + 1] as usize;
            for e in lo..hi {
                stat[self.out_to[e] as usize] += self.pi[u] * self.out_prob[e];
            }
        }
        let stat_defect = stat
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        (row_defect, stat_defect)
    }
}

/// The unique equilibrium state of t*phi as an order-max(k,2) Markov chain.
pub fn equilibrium_state(
    sft: &Sft,
    pot: &LocallyConstantPotential,
    t: f64,
) -> Result<MarkovMeasure> {
    let graph = TransferGraph::word_graph(sft, pot)?;
    equilibrium_on_graph(&graph, t)
}

pub(crate) fn equilibrium_on_graph(graph: &TransferGraph, t: f64) -> Result<MarkovMeasure> {
    let words = graph.words.clone().ok_or_else(|| {
        Error::OutOfRange("equilibrium states need the explicit word graph".into())
    })?;
    let right: Perron = graph.log_perron(t, None)?;
    let left: Perron = graph.left_log_perron(t, None)?;
    let n = graph.n();
    let mut out_start = vec![0u32; n + 1];
    let mut out_to = Vec::new();
    let mut out_prob = Vec::new();
    let mut out_symbol = Vec::new();
    for u in 0..n as u32 {
        let edges = graph.out_edges(u);
        let mut row: Vec<(u32, f64, u8)> = Vec::with_capacity(edges.len());
        for &e in edges {
            let (_, v) = graph.edge_endpoints(e);
            let logw = t * graph.phi[e as usize] + graph.log_mult[e as usize];
            let logp = logw + right.right_log[v as usize]
                - right.log_lambda
                - right.right_log[u as usize];
            row.push((v, logp.exp(), graph.symbol[e as usize]));
        }
        let total: f64 = row.iter().map(|r| r.1).sum();
        for (v, p, s) in row {
            out_to.push(v);
            out_prob.push(p / total);
            out_symbol.push(s);
        }
        out_start[u as usize + 1] = out_to.len() as u32;
    }
    let mut pi: Vec<f64> = (0..n)
        .map(|u| (left.right_log[u] + right.right_log[u]).exp())
        .collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(MarkovMeasure::from_parts(
        words,
        out_start,
        out_to,
        out_prob,
        out_symbol,
        pi,
        Provenance::Equilibrium { t },
    ))
}

/// (entropy, integral of phi) for the measure, both exact for the chain.
pub fn entropy_and_integral(
    m: &MarkovMeasure,
    pot: &LocallyConstantPotential,
) -> Result<(f64, f64)> {
    if pot.depth() > m.order() {
        let refined = m.refine_to(pot.depth())?;
        return Ok((refined.entropy(), refined.integral(pot)?));
    }
    Ok((m.entropy(), m.integral(pot)?))
}

/// Exact block entropy H_mu(P_n) of the n-cylinder partition.
pub fn block_entropy(m: &MarkovMeasure, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if n > 20 {
        return Err(Error::TooLarge {
            what: "block entropy length",
            size: n,
            budget: 20,
        });
    }
    let k = m.order();
    if n >= k {
        // chain rule: H_n = H(pi) + (n - k) h_cond
        let h_pi: f64 = m
            .pi
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        Ok(h_pi + (n - k) as f64 * m.entropy())
    } else {
        let mut marginal: HashMap<&[u8], f64> = HashMap::new();
        for (w, &p) in m.words.iter().zip(&m.pi) {
            *marginal.entry(&w.symbols()[..n]).or_insert(0.0) += p;
        }
        Ok(marginal
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum())
    }
}

/// Measured Gibbs constants over all words up to a length, per t.
#[derive(Clone, Debug)]
pub struct GibbsRow {
    pub t: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

#[derive(Clone, Debug)]
pub struct GibbsReport {
    pub rows: Vec<GibbsRow>,
    /// Least-squares fit of log C_hi against |t|: intercept a, slope b.
    pub fit_a: f64,
    pub fit_b: f64,
    pub fit_residual: f64,
    pub max_word_length: usize,
}

/// Cylinder extremes of the n-term Birkhoff sum: the window sum plus the
/// min/max over admissible completions of the terms that peek past the word.
fn birkhoff_cylinder_bounds(
    pot: &LocallyConstantPotential,
    tails: &(Vec<f64>, Vec<f64>),
    word_ids: &HashMap<&[u8], u32>,
    w: &Word,
) -> (f64, f64) {
    let window: f64 = w
        .symbols()
        .windows(pot.depth())
        .map(|win| pot.value_of_window(win))
        .sum();
    let kp = pot.depth().max(2);
    let last = word_ids[&w.symbols()[w.len() - kp..]] as usize;
    (window + tails.0[last], window + tails.1[last])
}

/// Per-state min and max completion sums for the k-1 Birkhoff terms that
/// straddle the end of a word.
fn completion_tails(
    graph: &TransferGraph,
    pot: &LocallyConstantPotential,
) -> (Vec<f64>, Vec<f64>) {
    let n = graph.n();
    let k = pot.depth();
    let kp = k.max(2);
    let steps = kp - 1;
    let first_counted = kp - k + 1;
    let state_value: Vec<f64> = graph
        .words
        .as_ref()
        .expect("completion tails need a word graph")
        .iter()
        .map(|w| pot.value_of_window(&w.symbols()[..k]))
        .collect();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for j in (1..=steps).rev() {
        let mut nlo = vec![f64::INFINITY; n];
        let mut nhi = vec![f64::NEG_INFINITY; n];
        for u in 0..n as u32 {
            for &e in graph.out_edges(u) {
                let (_, v) = graph.edge_endpoints(e);
                let contrib = if j >= first_counted {
                    state_value[v as usize]
                } else {
                    0.0
                };
                let ui = u as usize;
                nlo[ui] = nlo[ui].min(contrib + lo[v as usize]);
                nhi[ui] = nhi[ui].max(contrib + hi[v as usize]);
            }
        }
        lo = nlo;
        hi = nhi;
    }
    (lo, hi)
}

/// Entropy and integral of the equilibrium chain on an arbitrary transfer
/// graph (including lumped automata, where states are not words).
pub fn graph_equilibrium_entropy_integral(graph: &TransferGraph, t: f64) -> Result<(f64, f64)> {
    let right = graph.log_perron(t, None)?;
    let left = graph.left_log_perron(t, None)?;
    let n = graph.n();
    let mut pi: Vec<f64> = (0..n)
        .map(|u| (left.right_log[u] + right.right_log[u]).exp())
        .collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let mut entropy = 0.0;
    let mut integral = 0.0;
    for u in 0..n as u32 {
        let mut row: Vec<(f64, f64)> = Vec::new();
        for &e in graph.out_edges(u) {
            let (_, v) = graph.edge_endpoints(e);
            let logw = t * graph.phi[e as usize] + graph.log_mult[e as usize];
            let logp = logw + right.right_log[v as usize]
                - right.log_lambda
                - right.right_log[u as usize];
            row.push((logp.exp(), graph.phi[e as usize]));
        }
        let total: f64 = row.iter().map(|r| r.0).sum();
        for (p, phi) in row {
            let p = p / total;
            if p > 0.0 {
                entropy -= pi[u as usize] * p * p.ln();
                integral += pi[u as usize] * p * phi;
            }
        }
    }
    Ok((entropy, integral))
}

/// Gibbs-ratio bounds C_lo, C_hi over all words up to `max_word_length`
/// for each t, with an affine fit of log C_hi against |t|.
pub fn gibbs_report(
    sft: &Sft,
    pot: &LocallyConstantPotential,
    t_grid: &[f64],
    max_word_length: usize,
) -> Result<GibbsReport> {
    let graph = TransferGraph::word_graph(sft, pot)?;
    let kp = pot.depth().max(2);
    let tails = completion_tails(&graph, pot);
    let word_ids: HashMap<&[u8], u32> = graph
        .words
        .as_ref()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, w)| (w.symbols(), i as u32))
        .collect();
    let mut all_words: Vec<Word> = Vec::new();
    for n in kp..=max_word_length {
        all_words.extend(sft.enumerate_words(n)?);
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let m = equilibrium_on_graph(&graph, t)?;
        let p = graph.log_perron(t, None)?.log_lambda;
        let mut log_hi = f64::NEG_INFINITY;
        let mut log_lo = f64::INFINITY;
        for w in &all_words {
            let n = w.len() as f64;
            let (s_lo, s_hi) = birkhoff_cylinder_bounds(pot, &tails, &word_ids, w);
            let (inf_ts, sup_ts) = if t >= 0.0 {
                (t * s_lo, t * s_hi)
            } else {
                (t * s_hi, t * s_lo)
            };
            let log_mu = m.log_cylinder(w.symbols());
            log_hi = log_hi.max(log_mu - (inf_ts - n * p));
            log_lo = log_lo.min(log_mu - (sup_ts - n * p));
        }
        rows.push(GibbsRow {
            t,
            c_lo: log_lo.exp(),
            c_hi: log_hi.exp(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.t.abs()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.c_hi.ln()).collect();
    let (fit_a, fit_b, fit_residual) = least_squares(&xs, &ys);
    if !fit_b.is_finite() {
        return Err(Error::OutOfRange("gibbs growth fit is not finite".into()));
    }
    Ok(GibbsReport {
        rows,
        fit_a,
        fit_b,
        fit_residual,
        max_word_length,
    })
}

/// Ordinary least squares y = a + b x; returns (a, b, rms residual).
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (a + b * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::build_potential;
    use crate::potential::PotentialSpec;

    fn coord(sft: &Sft, values: &[f64]) -> LocallyConstantPotential {
        LocallyConstantPotential::from_symbol_values(sft, values).unwrap()
    }

    #[test]
    fn closed_form_pressure_example() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let p = pressure(&sft, &pot, 1.0).unwrap();
        assert!((p.value - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-13);
    }

    #[test]
    fn zero_potential_gives_topological_entropy() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 0.0]);
        let p = pressure(&sft, &pot, 0.0).unwrap();
        assert!((p.value - sft.topological_entropy()).abs() < 1e-12);
    }

    #[test]
    fn full_3_shift_depth_1_closed_form() {
        let sft = Sft::full_shift(3);
        let c = [0.3, -0.2, 0.9];
        let pot = coord(&sft, &c);
        let t = 2.0;
        let expect = ((2.0 * c[0]).exp() + (2.0 * c[1]).exp() + (2.0 * c[2]).exp()).ln();
        let p = pressure(&sft, &pot, t).unwrap();
        assert!((p.value - expect).abs() < 1e-12);
    }

    #[test]
    fn pressure_shift_by_constant() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.4), ("01", -0.3), ("10", 0.1)],
        )
        .unwrap();
        let shifted = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.4 + 0.7), ("01", -0.3 + 0.7), ("10", 0.1 + 0.7)],
        )
        .unwrap();
        let p0 = pressure(&sft, &pot, 1.0).unwrap().value;
        let p1 = pressure(&sft, &shifted, 1.0).unwrap().value;
        assert!((p1 - (p0 + 0.7)).abs() < 1e-12);
    }

    #[test]
    fn pressure_monotone_in_the_potential() {
        let sft = Sft::golden_mean();
        let lo = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.1), ("01", -0.5), ("10", 0.2)],
        )
        .unwrap();
        let hi = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.3), ("01", -0.5), ("10", 0.6)],
        )
        .unwrap();
        assert!(pressure(&sft, &lo, 1.0).unwrap().value <= pressure(&sft, &hi, 1.0).unwrap().value);
    }

    #[test]
    fn equilibrium_is_bernoulli_for_coordinate_potential() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        for t in [0.5, 2.0, -1.5] {
            let m = equilibrium_state(&sft, &pot, t).unwrap();
            let p0 = 1.0 / (1.0 + (-t as f64).exp());
            let got = m.cylinder(&Word(vec![0]));
            assert!((got - p0).abs() < 1e-11, "t {t}: {got} vs {p0}");
            let (rows, stat) = m.validate();
            assert!(rows < 1e-12 && stat < 1e-12);
        }
    }

    #[test]
    fn equilibrium_at_zero_is_parry_measure() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 0.0]);
        let m = equilibrium_state(&sft, &pot, 0.0).unwrap();
        // golden-mean Parry values from the adjacency eigenvector oracle
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let mu0 = phi * phi / (1.0 + phi * phi);
        assert!((m.cylinder(&Word(vec![0])) - mu0).abs() < 1e-11);
        let p01 = 1.0 / (phi * phi);
        let mu01 = mu0 * p01;
        assert!((m.cylinder(&Word(vec![0, 1])) - mu01).abs() < 1e-11);
    }

    #[test]
    fn equilibrium_at_zero_is_uniform_on_full_shift() {
        let sft = Sft::full_shift(3);
        let pot = coord(&sft, &[0.0, 0.0, 0.0]);
        let m = equilibrium_state(&sft, &pot, 0.0).unwrap();
        for s in 0..3u8 {
            assert!((m.cylinder(&Word(vec![s])) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_and_integral_examples() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let bern = MarkovMeasure::bernoulli(&sft, &[0.5, 0.5], 2).unwrap();
        let (h, i) = entropy_and_integral(&bern, &pot).unwrap();
        assert!((h - 2.0f64.ln()).abs() < 1e-12);
        assert!((i + 0.5).abs() < 1e-12);

        let delta = MarkovMeasure::point_mass(&sft, &Word(vec![0]), 2).unwrap();
        let (h, i) = entropy_and_integral(&delta, &pot).unwrap();
        assert!(h.abs() < 1e-12 && i.abs() < 1e-12);
    }

    #[test]
    fn variational_identity_at_equilibrium() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let t = 1.0;
        let m = equilibrium_state(&sft, &pot, t).unwrap();
        let (h, i) = entropy_and_integral(&m, &pot).unwrap();
        let p = pressure(&sft, &pot, t).unwrap().value;
        assert!((h + t * i - p).abs() < 1e-10);
    }

    #[test]
    fn tangency_of_equilibrium_lines() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.2), ("01", -0.4), ("10", 0.5)],
        )
        .unwrap();
        let t = 0.8;
        let m = equilibrium_state(&sft, &pot, t).unwrap();
        let (h, i) = entropy_and_integral(&m, &pot).unwrap();
        for s in [-3.0, -1.0, 0.0, 2.0, 5.0] {
            let p = pressure(&sft, &pot, s).unwrap().value;
            assert!(p >= h + s * i - 1e-12, "s {s}");
        }
    }

    #[test]
    fn convexity_on_grids() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.2), ("01", -0.4), ("10", 0.5)],
        )
        .unwrap();
        let ps: Vec<f64> = (-10..=10)
            .map(|i| pressure(&sft, &pot, i as f64 * 0.5).unwrap().value)
            .collect();
        for w in ps.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-10);
        }
    }

    #[test]
    fn block_entropy_bernoulli() {
        let sft = Sft::full_shift(2);
        let bern = MarkovMeasure::bernoulli(&sft, &[0.5, 0.5], 2).unwrap();
        for n in [1usize, 3, 10] {
            let h = block_entropy(&bern, n).unwrap();
            assert!((h - n as f64 * 2.0f64.ln()).abs() < 1e-11, "n {n}");
        }
    }

    #[test]
    fn block_entropy_order_one_marginal() {
        let sft = Sft::full_shift(2);
        let bern = MarkovMeasure::bernoulli(&sft, &[0.25, 0.75], 2).unwrap();
        let h1 = block_entropy(&bern, 1).unwrap();
        let expect = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((h1 - expect).abs() < 1e-12);
    }

    #[test]
    fn refine_preserves_cylinders() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 1.0]);
        let m = equilibrium_state(&sft, &pot, 0.7).unwrap();
        let r = m.refine_to(4).unwrap();
        for w in sft.enumerate_words(5).unwrap() {
            let a = m.log_cylinder(w.symbols());
            let b = r.log_cylinder(w.symbols());
            assert!((a - b).abs() < 1e-10, "{w}");
        }
    }

    #[test]
    fn gibbs_constants_are_one_on_full_shift_depth_1() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let rep = gibbs_report(&sft, &pot, &[0.0, 1.0, 3.0], 8).unwrap();
        for row in &rep.rows {
            assert!((row.c_lo - 1.0).abs() < 1e-9, "t {} c_lo {}", row.t, row.c_lo);
            assert!((row.c_hi - 1.0).abs() < 1e-9, "t {} c_hi {}", row.t, row.c_hi);
        }
    }

    #[test]
    fn gibbs_constants_bracket_one_on_golden_mean() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 0.0]);
        let rep = gibbs_report(&sft, &pot, &[0.0], 10).unwrap();
        let row = &rep.rows[0];
        assert!(row.c_lo <= 1.0 + 1e-12 && row.c_hi >= 1.0 - 1e-12);
        assert!(row.c_hi.is_finite());
    }

    #[test]
    fn lemma_block_entropy_within_log_gibbs_constant() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.3), ("01", -0.2), ("10", 0.1)],
        )
        .unwrap();
        let t = 1.5;
        let rep = gibbs_report(&sft, &pot, &[t], 10).unwrap();
        let m = equilibrium_state(&sft, &pot, t).unwrap();
        let h = m.entropy();
        let c_hi = rep.rows[0].c_hi;
        let c_lo = rep.rows[0].c_lo;
        let log_c = c_hi.ln().max(-(c_lo.ln()));
        for n in 2..=12 {
            let hn = block_entropy(&m, n).unwrap();
            assert!(
                (hn - n as f64 * h).abs() <= log_c + 1e-9,
                "n {n}: |{}| vs {}",
                hn - n as f64 * h,
                log_c
            );
        }
    }

    #[test]
    fn sunny_engine_pressure_runs_at_depth_41() {
        let sft = Sft::full_shift(2);
        let pot = build_potential(&sft, &PotentialSpec::DistSunny, 41).unwrap();
        assert!(!pot.is_dense());
        let mut engine = PressureEngine::new(&sft, &pot).unwrap();
        let p = engine.pressure(1.0).unwrap();
        assert!(p.value > 0.0 && p.value < 2.0f64.ln());
    }
}
