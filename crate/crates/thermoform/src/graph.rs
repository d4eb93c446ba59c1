//! Weighted transfer graphs and the spectral machinery shared by the
//! pressure and ergodic-optimization layers.
//!
//! A [`TransferGraph`] is a strongly connected digraph whose edges carry a
//! potential contribution `phi` and a log-multiplicity. The matrix with
//! entries `exp(t*phi + log_mult)` is the transfer operator at parameter t;
//! its log Perron eigenvalue is computed by power iteration in log domain
//! with Collatz-Wielandt bounds, so values like exp(-1000) never leave the
//! log scale. The same structure serves three producers:
//!
//! * the explicit word graph on admissible max(k,2)-words of an SFT,
//! * a lumped automaton for the sunny-side-up distance potential, and
//! * a lumped automaton for the distance to a fixed point on a full shift.
//!
//! The lumped automata track the distances to the most recent few
//! "special" symbols (capped once they stop mattering) and re-attribute
//! each coordinate's potential value to the read step at which it becomes
//! determined. Cycle-weight sums then agree with Birkhoff sums of the
//! depth-(2r+1) table along every periodic orbit, so the Perron values of
//! the lumped and explicit presentations coincide; tests check this
//! against the explicit engine at small depth.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::potential::LocallyConstantPotential;
use crate::sft::{Sft, Word};

/// Transfer matrices are refused above this many states.
pub const STATE_BUDGET: usize = 10_000;
/// Relative tolerance of the power iteration.
pub const REL_TOL: f64 = 1e-13;
/// Iteration cap before reporting non-convergence.
pub const MAX_ITERS: usize = 100_000;
/// Absolute tolerance for ties in max-plus normalization.
pub const TIGHT_TOL: f64 = 1e-9;
/// Karp's algorithm is used up to this SCC size, policy iteration beyond.
const KARP_LIMIT: usize = 2_000;

#[derive(Clone, Debug)]
pub struct TransferGraph {
    n: usize,
    out_start: Vec<u32>,
    out_edge: Vec<u32>,
    in_start: Vec<u32>,
    in_edge: Vec<u32>,
    edge_src: Vec<u32>,
    edge_dst: Vec<u32>,
    pub phi: Vec<f64>,
    pub log_mult: Vec<f64>,
    pub symbol: Vec<u8>,
    /// State labels for explicit word graphs.
    pub words: Option<Vec<Word>>,
}

/// Result of a converged power iteration.
#[derive(Clone, Debug)]
pub struct Perron {
    pub log_lambda: f64,
    /// Certified half-width of the Collatz-Wielandt bracket.
    pub halfwidth: f64,
    /// Log right eigenvector, normalized to max 0.
    pub right_log: Vec<f64>,
    pub iters: usize,
}

impl TransferGraph {
    pub fn from_edge_list(n: usize, list: &[(u32, u32, f64, f64, u8)]) -> TransferGraph {
        let mut order: Vec<u32> = (0..list.len() as u32).collect();
        order.sort_by_key(|&e| list[e as usize].0);
        let mut edge_src = Vec::with_capacity(list.len());
        let mut edge_dst = Vec::with_capacity(list.len());
        let mut phi = Vec::with_capacity(list.len());
        let mut log_mult = Vec::with_capacity(list.len());
        let mut symbol = Vec::with_capacity(list.len());
        for &e in &order {
            let (s, d, p, m, sym) = list[e as usize];
            edge_src.push(s);
            edge_dst.push(d);
            phi.push(p);
            log_mult.push(m);
            symbol.push(sym);
        }
        let out_edge: Vec<u32> = (0..edge_src.len() as u32).collect();
        let out_start = starts_of(n, &edge_src, &out_edge);
        let mut in_edge: Vec<u32> = (0..edge_dst.len() as u32).collect();
        in_edge.sort_by_key(|&e| edge_dst[e as usize]);
        let in_start = starts_of(n, &edge_dst, &in_edge);
        TransferGraph {
            n,
            out_start,
            out_edge,
            in_start,
            in_edge,
            edge_src,
            edge_dst,
            phi,
            log_mult,
            symbol,
            words: None,
        }
    }

    /// Zero-potential graph on the alphabet itself.
    pub fn from_adjacency(sft: &Sft) -> TransferGraph {
        let k = sft.alphabet_size();
        let mut list = Vec::new();
        for a in 0..k as u8 {
            for b in 0..k as u8 {
                if sft.allowed(a, b) {
                    list.push((a as u32, b as u32, 0.0, 0.0, b));
                }
            }
        }
        TransferGraph::from_edge_list(k, &list)
    }

    /// Explicit transfer graph on admissible max(depth,2)-words. The edge
    /// u -> v exists when u and v overlap in all but one symbol; its weight
    /// is the table value of the leading depth-window of u.
    pub fn word_graph(sft: &Sft, pot: &LocallyConstantPotential) -> Result<TransferGraph> {
        let k = pot.depth().max(2);
        let count = sft.word_count(k);
        if count > num_bigint::BigUint::from(STATE_BUDGET) {
            return Err(Error::TooLarge {
                what: "transfer matrix states",
                size: usize::MAX,
                budget: STATE_BUDGET,
            });
        }
        let words = sft.enumerate_words(k)?;
        let mut by_prefix: HashMap<&[u8], Vec<u32>> = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            by_prefix
                .entry(&w.symbols()[..k - 1])
                .or_default()
                .push(i as u32);
        }
        let mut list = Vec::new();
        for (i, u) in words.iter().enumerate() {
            let weight = pot.value_of_window(&u.symbols()[..pot.depth()]);
            if let Some(targets) = by_prefix.get(&u.symbols()[1..]) {
                for &j in targets {
                    let appended = words[j as usize].symbols()[k - 1];
                    list.push((i as u32, j, weight, 0.0, appended));
                }
            }
        }
        let mut g = TransferGraph::from_edge_list(words.len(), &list);
        g.words = Some(words);
        Ok(g)
    }

    /// Lumped automaton computing the pressure of the depth-(2r+1)
    /// sunny-side-up distance table on a binary SFT. States hold the
    /// distances to the three most recent 1s, saturated at 2r+2.
    pub fn sunny_automaton(sft: &Sft, radius: usize) -> Result<TransferGraph> {
        if sft.alphabet_size() != 2 {
            return Err(Error::OutOfRange(
                "sunny automaton needs a binary alphabet".into(),
            ));
        }
        let cap = (2 * radius + 2) as u16;
        let start = [cap, cap, cap];
        let mut index: HashMap<[u16; 3], u32> = HashMap::new();
        let mut states = vec![start];
        index.insert(start, 0);
        let mut list: Vec<(u32, u32, f64, f64, u8)> = Vec::new();
        let mut frontier = vec![0u32];
        while let Some(id) = frontier.pop() {
            let st = states[id as usize];
            let last_symbol = if st[0] == 0 { 1u8 } else { 0u8 };
            for sym in 0..2u8 {
                if !sft.allowed(last_symbol, sym) {
                    continue;
                }
                let bump = |d: u16| (d + 1).min(cap);
                let next = if sym == 1 {
                    [0, bump(st[0]), bump(st[1])]
                } else {
                    [bump(st[0]), bump(st[1]), bump(st[2])]
                };
                let nid = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    frontier.push(states.len() as u32 - 1);
                    states.len() as u32 - 1
                });
                let phi = -sunny_emission(&states[nid as usize], radius);
                list.push((id, nid, phi, 0.0, sym));
            }
        }
        Ok(TransferGraph::from_edge_list(states.len(), &list))
    }

    /// Lumped automaton for the depth-(2r+1) table of -a d_alpha(x, fixed
    /// point) on a full shift. States hold the distances to the two most
    /// recent mismatching symbols; mismatch edges carry multiplicity
    /// alphabet-1.
    pub fn orbit_fixed_automaton(
        alphabet: usize,
        a: f64,
        alpha: f64,
        radius: usize,
    ) -> TransferGraph {
        let cap = (2 * radius + 2) as u16;
        let start = [cap, cap];
        let mut index: HashMap<[u16; 2], u32> = HashMap::new();
        let mut states = vec![start];
        index.insert(start, 0);
        let mut list: Vec<(u32, u32, f64, f64, u8)> = Vec::new();
        let mut frontier = vec![0u32];
        let mism_mult = ((alphabet - 1) as f64).ln();
        while let Some(id) = frontier.pop() {
            let st = states[id as usize];
            let bump = |d: u16| (d + 1).min(cap);
            for mismatch in [false, true] {
                let next = if mismatch {
                    [0, bump(st[0])]
                } else {
                    [bump(st[0]), bump(st[1])]
                };
                let nid = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    frontier.push(states.len() as u32 - 1);
                    states.len() as u32 - 1
                });
                let phi = -orbit_emission(&states[nid as usize], a, alpha, radius);
                let mult = if mismatch { mism_mult } else { 0.0 };
                list.push((id, nid, phi, mult, mismatch as u8));
            }
        }
        TransferGraph::from_edge_list(states.len(), &list)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same graph with negated potential weights (for minimum cycle means).
    pub fn negated(&self) -> TransferGraph {
        let mut g = self.clone();
        g.phi.iter_mut().for_each(|p| *p = -*p);
        g
    }

    pub fn edge_count(&self) -> usize {
        self.edge_src.len()
    }

    pub fn edge_endpoints(&self, e: u32) -> (u32, u32) {
        (self.edge_src[e as usize], self.edge_dst[e as usize])
    }

    pub fn out_edges(&self, u: u32) -> &[u32] {
        let lo = self.out_start[u as usize] as usize;
        let hi = self.out_start[u as usize + 1] as usize;
        &self.out_edge[lo..hi]
    }

    pub fn in_edges(&self, v: u32) -> &[u32] {
        let lo = self.in_start[v as usize] as usize;
        let hi = self.in_start[v as usize + 1] as usize;
        &self.in_edge[lo..hi]
    }

    fn log_weights(&self, t: f64) -> Vec<f64> {
        self.phi
            .iter()
            .zip(&self.log_mult)
            .map(|(&p, &m)| t * p + m)
            .collect()
    }

    /// Log Perron eigenvalue of exp(t phi + log_mult) with a certified
    /// Collatz-Wielandt bracket, by log-domain power iteration.
    pub fn log_perron(&self, t: f64, warm: Option<&[f64]>) -> Result<Perron> {
        let w = self.log_weights(t);
        let mut x: Vec<f64> = match warm {
            Some(v) if v.len() == self.n => v.to_vec(),
            _ => vec![0.0; self.n],
        };
        let mut y = vec![0.0; self.n];
        let mut prev_mid = f64::NAN;
        for iter in 1..=MAX_ITERS {
            for v in 0..self.n {
                let mut m = f64::NEG_INFINITY;
                let mut sum = 0.0;
                for &e in self.in_edges(v as u32) {
                    let term = w[e as usize] + x[self.edge_src[e as usize] as usize];
                    if term > m {
                        sum = sum * (m - term).exp() + 1.0;
                        m = term;
                    } else {
                        sum += (term - m).exp();
                    }
                }
                y[v] = m + sum.ln();
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in 0..self.n {
                let d = y[v] - x[v];
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let mid = 0.5 * (lo + hi);
            if hi - lo <= REL_TOL * mid.abs().max(1.0) {
                let shift = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for v in y.iter_mut() {
                    *v -= shift;
                }
                return Ok(Perron {
                    log_lambda: mid,
                    halfwidth: 0.5 * (hi - lo) + f64::EPSILON * (1.0 + mid.abs()),
                    right_log: y,
                    iters: iter,
                });
            }
            let shift = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in 0..self.n {
                x[v] = y[v] - shift;
            }
            if iter == MAX_ITERS {
                return Err(Error::NonConvergence {
                    last: mid,
                    previous: prev_mid,
                });
            }
            prev_mid = mid;
        }
        unreachable!()
    }

    /// Log left Perron eigenvector (power iteration on the transpose).
    pub fn left_log_perron(&self, t: f64, warm: Option<&[f64]>) -> Result<Perron> {
        let w = self.log_weights(t);
        let mut x: Vec<f64> = match warm {
            Some(v) if v.len() == self.n => v.to_vec(),
            _ => vec![0.0; self.n],
        };
        let mut y = vec![0.0; self.n];
        let mut prev_mid = f64::NAN;
        for iter in 1..=MAX_ITERS {
            for u in 0..self.n {
                let mut m = f64::NEG_INFINITY;
                let mut sum = 0.0;
                for &e in self.out_edges(u as u32) {
                    let term = w[e as usize] + x[self.edge_dst[e as usize] as usize];
                    if term > m {
                        sum = sum * (m - term).exp() + 1.0;
                        m = term;
                    } else {
                        sum += (term - m).exp();
                    }
                }
                y[u] = m + sum.ln();
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for u in 0..self.n {
                let d = y[u] - x[u];
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let mid = 0.5 * (lo + hi);
            if hi - lo <= REL_TOL * mid.abs().max(1.0) {
                let shift = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for v in y.iter_mut() {
                    *v -= shift;
                }
                return Ok(Perron {
                    log_lambda: mid,
                    halfwidth: 0.5 * (hi - lo) + f64::EPSILON * (1.0 + mid.abs()),
                    right_log: y,
                    iters: iter,
                });
            }
            let shift = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for u in 0..self.n {
                x[u] = y[u] - shift;
            }
            if iter == MAX_ITERS {
                return Err(Error::NonConvergence {
                    last: mid,
                    previous: prev_mid,
                });
            }
            prev_mid = mid;
        }
        unreachable!()
    }

    /// Strongly connected components (Tarjan, iterative), optionally
    /// restricted to masked nodes/edges.
    pub fn sccs(&self, node_mask: Option<&[bool]>, edge_mask: Option<&[bool]>) -> Vec<Vec<u32>> {
        let keep_node = |v: u32| node_mask.map_or(true, |m| m[v as usize]);
        let keep_edge = |e: u32| edge_mask.map_or(true, |m| m[e as usize]);
        let mut index = vec![u32::MAX; self.n];
        let mut low = vec![0u32; self.n];
        let mut on_stack = vec![false; self.n];
        let mut stack: Vec<u32> = Vec::new();
        let mut next_index = 0u32;
        let mut comps = Vec::new();
        // call stack: (node, out-edge cursor)
        let mut call: Vec<(u32, usize)> = Vec::new();
        for root in 0..self.n as u32 {
            if !keep_node(root) || index[root as usize] != u32::MAX {
                continue;
            }
            call.push((root, 0));
            index[root as usize] = next_index;
            low[root as usize] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root as usize] = true;
            while let Some(&mut (v, ref mut cursor)) = call.last_mut() {
                let edges = self.out_edges(v);
                if *cursor < edges.len() {
                    let e = edges[*cursor];
                    *cursor += 1;
                    let w = self.edge_dst[e as usize];
                    if !keep_edge(e) || !keep_node(w) {
                        continue;
                    }
                    if index[w as usize] == u32::MAX {
                        call.push((w, 0));
                        index[w as usize] = next_index;
                        low[w as usize] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w as usize] = true;
                    } else if on_stack[w as usize] {
                        low[v as usize] = low[v as usize].min(index[w as usize]);
                    }
                } else {
                    call.pop();
                    if let Some(&mut (parent, _)) = call.last_mut() {
                        low[parent as usize] = low[parent as usize].min(low[v as usize]);
                    }
                    if low[v as usize] == index[v as usize] {
                        let mut comp = Vec::new();
                        while let Some(w) = stack.pop() {
                            on_stack[w as usize] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// Best phi edge u -> v under the optional edge mask.
    fn best_edge_between(&self, u: u32, v: u32, edge_mask: Option<&[bool]>) -> Option<u32> {
        let mut best: Option<u32> = None;
        for &e in self.out_edges(u) {
            if self.edge_dst[e as usize] == v && edge_mask.map_or(true, |m| m[e as usize]) {
                if best.map_or(true, |b| self.phi[e as usize] > self.phi[b as usize]) {
                    best = Some(e);
                }
            }
        }
        best
    }

    /// Canonical mean of a cycle given as a node sequence: rotate so the
    /// smallest node id comes first, sum the best edges in order, divide.
    pub fn canonical_cycle_mean(&self, cycle: &[u32]) -> f64 {
        let len = cycle.len();
        let argmin = (0..len).min_by_key(|&i| cycle[i]).unwrap();
        let mut sum = 0.0;
        for i in 0..len {
            let u = cycle[(argmin + i) % len];
            let v = cycle[(argmin + i + 1) % len];
            let e = self
                .best_edge_between(u, v, None)
                .expect("cycle edge exists");
            sum += self.phi[e as usize];
        }
        sum / len as f64
    }

    /// Maximum mean cycle weight with the achieving cycle. Karp's algorithm
    /// per SCC up to a size limit, policy iteration beyond it. None when
    /// the graph has no cycle.
    pub fn max_cycle_mean(&self) -> Option<(f64, Vec<u32>)> {
        let mut best: Option<(f64, Vec<u32>)> = None;
        for comp in self.sccs(None, None) {
            let has_edge = comp.iter().any(|&u| {
                self.out_edges(u)
                    .iter()
                    .any(|&e| comp.contains(&self.edge_dst[e as usize]))
            });
            if comp.len() == 1 && self.best_edge_between(comp[0], comp[0], None).is_none() {
                continue;
            }
            if !has_edge {
                continue;
            }
            let found = if comp.len() <= KARP_LIMIT {
                self.karp_scc(&comp).or_else(|| self.howard_scc(&comp))
            } else {
                self.howard_scc(&comp)
            };
            if let Some((mean, cycle)) = found {
                if best.as_ref().map_or(true, |(m, _)| mean > *m) {
                    best = Some((mean, cycle));
                }
            }
        }
        best
    }

    /// Karp's dynamic program on one strongly connected component.
    fn karp_scc(&self, comp: &[u32]) -> Option<(f64, Vec<u32>)> {
        let m = comp.len();
        let mut local = HashMap::with_capacity(m);
        for (i, &v) in comp.iter().enumerate() {
            local.insert(v, i as u32);
        }
        // edges within the component, grouped by local target
        let mut in_lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
        for &v in comp {
            let lv = local[&v] as usize;
            for &e in self.in_edges(v) {
                if let Some(&lu) = local.get(&self.edge_src[e as usize]) {
                    in_lists[lv].push((lu, self.phi[e as usize]));
                }
            }
        }
        let rows = m + 1;
        let mut dist = vec![f64::NEG_INFINITY; rows * m];
        let mut pred = vec![u32::MAX; rows * m];
        dist[0] = 0.0; // source = comp[0], local 0
        for k in 1..=m {
            for v in 0..m {
                let mut best = f64::NEG_INFINITY;
                let mut arg = u32::MAX;
                for &(u, w) in &in_lists[v] {
                    let cand = dist[(k - 1) * m + u as usize] + w;
                    if cand > best {
                        best = cand;
                        arg = u;
                    }
                }
                dist[k * m + v] = best;
                pred[k * m + v] = arg;
            }
        }
        let mut value = f64::NEG_INFINITY;
        let mut vstar = usize::MAX;
        for v in 0..m {
            let fn_v = dist[m * m + v];
            if !fn_v.is_finite() {
                continue;
            }
            let mut inner = f64::INFINITY;
            for k in 0..m {
                let fk = dist[k * m + v];
                if fk.is_finite() {
                    inner = inner.min((fn_v - fk) / (m - k) as f64);
                }
            }
            if inner.is_finite() && inner > value {
                value = inner;
                vstar = v;
            }
        }
        if vstar == usize::MAX {
            return None;
        }
        // walk predecessors from level m; a repeated node bounds a critical cycle
        let mut path = Vec::with_capacity(m + 1);
        let mut v = vstar as u32;
        for k in (0..=m).rev() {
            path.push(v);
            if k > 0 {
                v = pred[k * m + v as usize];
                if v == u32::MAX {
                    break;
                }
            }
        }
        let mut seen: HashMap<u32, usize> = HashMap::new();
        for (i, &node) in path.iter().enumerate() {
            if let Some(&j) = seen.get(&node) {
                let cycle_local: Vec<u32> = path[j..i].to_vec();
                let cycle: Vec<u32> = cycle_local.iter().map(|&l| comp[l as usize]).collect();
                let mean = self.canonical_cycle_mean(&cycle);
                if (mean - value).abs() <= 1e-9 * (1.0 + value.abs()) {
                    return Some((mean, cycle));
                } else {
                    return None; // defer to policy iteration
                }
            }
            seen.insert(node, i);
        }
        None
    }

    /// Howard policy iteration for the maximum mean cycle on one SCC.
    fn howard_scc(&self, comp: &[u32]) -> Option<(f64, Vec<u32>)> {
        let m = comp.len();
        let mut local = HashMap::with_capacity(m);
        for (i, &v) in comp.iter().enumerate() {
            local.insert(v, i as u32);
        }
        let mut out_lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
        for &u in comp {
            let lu = local[&u] as usize;
            for &e in self.out_edges(u) {
                if let Some(&lv) = local.get(&self.edge_dst[e as usize]) {
                    out_lists[lu].push((lv, self.phi[e as usize]));
                }
            }
        }
        if out_lists.iter().any(|l| l.is_empty()) {
            return None;
        }
        let mut policy: Vec<usize> = out_lists
            .iter()
            .map(|l| {
                (0..l.len())
                    .max_by(|&a, &b| l[a].1.partial_cmp(&l[b].1).unwrap())
                    .unwrap()
            })
            .collect();
        let mut gain = vec![0.0; m];
        let mut bias = vec![0.0; m];
        let eps = 1e-12;
        for _round in 0..10_000 {
            evaluate_policy(&out_lists, &policy, &mut gain, &mut bias);
            let mut changed = false;
            // phase 1: improve gain
            for u in 0..m {
                let cur = out_lists[u][policy[u]].0 as usize;
                for (i, &(v, _)) in out_lists[u].iter().enumerate() {
                    if gain[v as usize] > gain[cur] + eps && i != policy[u] {
                        policy[u] = i;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                // phase 2: improve bias among gain-optimal edges
                for u in 0..m {
                    let g = gain[u];
                    let cur_val = {
                        let (v, w) = out_lists[u][policy[u]];
                        w - g + bias[v as usize]
                    };
                    for (i, &(v, w)) in out_lists[u].iter().enumerate() {
                        if (gain[v as usize] - g).abs() <= eps {
                            let val = w - g + bias[v as usize];
                            if val > cur_val + eps && i != policy[u] {
                                policy[u] = i;
                                changed = true;
                                break;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // best gain node; follow the policy to its cycle
        let ustar = (0..m).max_by(|&a, &b| gain[a].partial_cmp(&gain[b]).unwrap())?;
        let mut seen = vec![usize::MAX; m];
        let mut order = Vec::new();
        let mut v = ustar;
        while seen[v] == usize::MAX {
            seen[v] = order.len();
            order.push(v);
            v = out_lists[v][policy[v]].0 as usize;
        }
        let cycle_local = &order[seen[v]..];
        let cycle: Vec<u32> = cycle_local.iter().map(|&l| comp[l]).collect();
        let mean = self.canonical_cycle_mean(&cycle);
        Some((mean, cycle))
    }

    /// Feasible value function with A <= phi_e + u(src) - u(dst) <= B for
    /// every edge, via Bellman-Ford on the difference-constraint digraph.
    /// None when rounding noise prevents stabilization.
    pub fn bilateral_value_function(&self, a: f64, b: f64) -> Option<Vec<f64>> {
        let mut u = vec![0.0; self.n];
        let rounds = self.n + 5;
        for round in 0..rounds {
            let mut changed = false;
            for e in 0..self.edge_count() {
                let s = self.edge_src[e] as usize;
                let d = self.edge_dst[e] as usize;
                let w = self.phi[e];
                // u_d <= u_s + (w - a)
                let cand = u[s] + (w - a);
                if cand < u[d] - 1e-15 {
                    u[d] = cand;
                    changed = true;
                }
                // u_s <= u_d + (b - w)
                let cand = u[d] + (b - w);
                if cand < u[s] - 1e-15 {
                    u[s] = cand;
                    changed = true;
                }
            }
            if !changed {
                return Some(u);
            }
            if round == rounds - 1 {
                // accept if constraints hold within tolerance
                let ok = (0..self.edge_count()).all(|e| {
                    let corrected = self.phi[e] + u[self.edge_src[e] as usize]
                        - u[self.edge_dst[e] as usize];
                    corrected >= a - TIGHT_TOL && corrected <= b + TIGHT_TOL
                });
                if ok {
                    return Some(u);
                }
            }
        }
        None
    }

    /// One-sided value function with phi_e + u(src) - u(dst) <= beta.
    pub fn one_sided_value_function(&self, beta: f64) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for _ in 0..self.n + 5 {
            let mut changed = false;
            for e in 0..self.edge_count() {
                let s = self.edge_src[e] as usize;
                let d = self.edge_dst[e] as usize;
                let cand = u[s] + self.phi[e] - beta;
                if cand > u[d] + 1e-15 {
                    u[d] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        u
    }

    /// Log Perron value of the multiplicity adjacency restricted to a node
    /// set and edge mask, via power iteration on A + I (irreducibility of
    /// the component makes A + I primitive).
    pub fn restricted_adjacency_entropy(&self, nodes: &[u32], edge_mask: &[bool]) -> f64 {
        let m = nodes.len();
        let mut local = HashMap::with_capacity(m);
        for (i, &v) in nodes.iter().enumerate() {
            local.insert(v, i);
        }
        let mut in_lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for &v in nodes {
            let lv = local[&v];
            for &e in self.in_edges(v) {
                if !edge_mask[e as usize] {
                    continue;
                }
                if let Some(&lu) = local.get(&self.edge_src[e as usize]) {
                    in_lists[lv].push((lu, self.log_mult[e as usize].exp()));
                }
            }
        }
        let mut x = vec![1.0; m];
        let mut y = vec![0.0; m];
        for _ in 0..MAX_ITERS {
            for v in 0..m {
                let mut acc = x[v]; // the +I term
                for &(u, mult) in &in_lists[v] {
                    acc += mult * x[u];
                }
                y[v] = acc;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in 0..m {
                let r = y[v] / x[v];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * mid {
                return (mid - 1.0).max(f64::MIN_POSITIVE).ln().max(0.0);
            }
            let scale = 1.0 / y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in 0..m {
                x[v] = y[v] * scale;
            }
        }
        f64::NAN
    }
}

fn starts_of(n: usize, keys: &[u32], order: &[u32]) -> Vec<u32> {
    let mut starts = vec![0u32; n + 1];
    for &e in order {
        starts[keys[e as usize] as usize + 1] += 1;
    }
    for i in 0..n {
        starts[i + 1] += starts[i];
    }
    starts
}

/// Evaluate a policy: per-node gain (mean of the reached cycle) and bias.
fn evaluate_policy(
    out_lists: &[Vec<(u32, f64)>],
    policy: &[usize],
    gain: &mut [f64],
    bias: &mut [f64],
) {
    let m = out_lists.len();
    let mut state = vec![0u8; m]; // 0 unvisited, 1 in progress, 2 done
    for start in 0..m {
        if state[start] != 0 {
            continue;
        }
        // walk until a node that is done or in progress this walk
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = out_lists[v][policy[v]].0 as usize;
        }
        if state[v] == 1 {
            // new cycle: v is on `path`
            let pos = path.iter().position(|&u| u == v).unwrap();
            let cycle = &path[pos..];
            let mut total = 0.0;
            for &u in cycle {
                total += out_lists[u][policy[u]].1;
            }
            let g = total / cycle.len() as f64;
            // bias: h(u) = w(u -> next) - g + h(next), anchored at cycle[0] = 0
            gain[cycle[0]] = g;
            bias[cycle[0]] = 0.0;
            for i in (1..cycle.len()).rev() {
                let u = cycle[i];
                let (next, w) = out_lists[u][policy[u]];
                let next_bias = if i == cycle.len() - 1 {
                    // next is cycle[0]
                    debug_assert_eq!(next as usize, cycle[0]);
                    0.0
                } else {
                    bias[next as usize]
                };
                gain[u] = g;
                bias[u] = w - g + next_bias;
                let _ = next;
            }
            for &u in cycle {
                state[u] = 2;
            }
        }
        // tree part of the path (prefix before the cycle / before a done node)
        for &u in path.iter().rev() {
            if state[u] == 2 {
                continue;
            }
            let (next, w) = out_lists[u][policy[u]];
            gain[u] = gain[next as usize];
            bias[u] = w - gain[u] + bias[next as usize];
            state[u] = 2;
        }
    }
}

/// Re-attributed emission for the sunny-side-up table: total weight of all
/// centers whose value becomes determined at this read step.
fn sunny_emission(state: &[u16; 3], radius: usize) -> f64 {
    let r = radius as u16;
    let count_in = |lo: u16, hi: u16| -> u32 {
        state
            .iter()
            .filter(|&&d| d >= lo && d <= hi && d < 2 * r + 2)
            .count() as u32
    };
    let mut total = 0.0;
    for m in 1..=r {
        let interior = count_in(1, 2 * m - 1);
        let window = count_in(0, 2 * m);
        if interior <= 1 && window >= 2 {
            total += (2.0f64).powi(-(m as i32));
        }
    }
    if count_in(1, 2 * r + 1) <= 1 {
        total += (2.0f64).powi(-(r as i32) - 1);
    }
    total
}

/// Re-attributed emission for the fixed-point distance table.
fn orbit_emission(state: &[u16; 2], a: f64, alpha: f64, radius: usize) -> f64 {
    let r = radius as u16;
    let count_in = |lo: u16, hi: u16| -> u32 {
        state
            .iter()
            .filter(|&&d| d >= lo && d <= hi && d < 2 * r + 2)
            .count() as u32
    };
    let mut total = 0.0;
    if state[0] == 0 {
        total += a; // mismatch at the center itself
    }
    for m in 1..=r {
        let interior = if m == 0 { 0 } else { count_in(1, 2 * m - 1) };
        let window = count_in(0, 2 * m);
        if interior == 0 && window >= 1 {
            total += a * alpha.powi(m as i32);
        }
    }
    if count_in(1, 2 * r + 1) == 0 {
        total += a * alpha.powi(r as i32 + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_potential, PotentialSpec};

    #[test]
    fn word_graph_full_2_shift_depth_1() {
        let sft = Sft::full_shift(2);
        let pot = LocallyConstantPotential::from_symbol_values(&sft, &[0.0, -1.0]).unwrap();
        let g = TransferGraph::word_graph(&sft, &pot).unwrap();
        assert_eq!(g.n(), 4); // 2-words
        let p = g.log_perron(1.0, None).unwrap();
        assert!((p.log_lambda - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-12);
    }

    #[test]
    fn perron_enclosure_brackets_truth() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_symbol_values(&sft, &[0.0, 0.0]).unwrap();
        let g = TransferGraph::word_graph(&sft, &pot).unwrap();
        let p = g.log_perron(0.0, None).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((p.log_lambda - phi.ln()).abs() <= p.halfwidth + 1e-14);
    }

    #[test]
    fn sunny_automaton_matches_dense_word_graph() {
        let sft = Sft::full_shift(2);
        for depth in [3usize, 5, 7] {
            let radius = (depth - 1) / 2;
            let pot = build_potential(&sft, &PotentialSpec::DistSunny, depth).unwrap();
            let dense = TransferGraph::word_graph(&sft, &pot).unwrap();
            let lumped = TransferGraph::sunny_automaton(&sft, radius).unwrap();
            for t in [0.0, 0.7, 3.0, 17.0, -2.0] {
                let a = dense.log_perron(t, None).unwrap().log_lambda;
                let b = lumped.log_perron(t, None).unwrap().log_lambda;
                assert!(
                    (a - b).abs() < 1e-10,
                    "depth {depth} t {t}: dense {a} lumped {b}"
                );
            }
        }
    }

    #[test]
    fn sunny_automaton_matches_dense_on_golden_mean() {
        let sft = Sft::golden_mean();
        let pot = build_potential(&sft, &PotentialSpec::DistSunny, 5).unwrap();
        let dense = TransferGraph::word_graph(&sft, &pot).unwrap();
        let lumped = TransferGraph::sunny_automaton(&sft, 2).unwrap();
        for t in [0.5, 4.0] {
            let a = dense.log_perron(t, None).unwrap().log_lambda;
            let b = lumped.log_perron(t, None).unwrap().log_lambda;
            assert!((a - b).abs() < 1e-10, "t {t}: dense {a} lumped {b}");
        }
    }

    #[test]
    fn orbit_automaton_matches_dense_word_graph() {
        for alphabet in [2usize, 3] {
            let sft = Sft::full_shift(alphabet);
            let spec = PotentialSpec::DistOrbit {
                orbit: Word(vec![0]),
                a: 1.0,
                alpha: 0.5,
            };
            let pot = build_potential(&sft, &spec, 5).unwrap();
            let dense = TransferGraph::word_graph(&sft, &pot).unwrap();
            let lumped = TransferGraph::orbit_fixed_automaton(alphabet, 1.0, 0.5, 2);
            for t in [0.0, 1.3, 6.0] {
                let a = dense.log_perron(t, None).unwrap().log_lambda;
                let b = lumped.log_perron(t, None).unwrap().log_lambda;
                assert!(
                    (a - b).abs() < 1e-10,
                    "alphabet {alphabet} t {t}: dense {a} lumped {b}"
                );
            }
        }
    }

    #[test]
    fn karp_simple_two_loop_graph() {
        // loop at 0 with weight 1, loop at 1 with weight 3, connectors
        let g = TransferGraph::from_edge_list(
            2,
            &[
                (0, 0, 1.0, 0.0, 0),
                (1, 1, 3.0, 0.0, 0),
                (0, 1, 0.0, 0.0, 0),
                (1, 0, 0.0, 0.0, 0),
            ],
        );
        let (mean, cycle) = g.max_cycle_mean().unwrap();
        assert_eq!(mean, 3.0);
        assert_eq!(cycle, vec![1]);
    }

    #[test]
    fn howard_agrees_with_karp_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(2..7usize);
            let mut list = Vec::new();
            for v in 0..n as u32 {
                // ring to keep it strongly connected
                list.push((v, (v + 1) % n as u32, rng.gen_range(-2.0..2.0), 0.0, 0));
            }
            for _ in 0..rng.gen_range(0..2 * n) {
                let u = rng.gen_range(0..n) as u32;
                let v = rng.gen_range(0..n) as u32;
                list.push((u, v, rng.gen_range(-2.0..2.0), 0.0, 0));
            }
            let g = TransferGraph::from_edge_list(n, &list);
            let comp: Vec<u32> = g.sccs(None, None).into_iter().flatten().collect();
            let karp = g.karp_scc(&comp);
            let howard = g.howard_scc(&comp);
            let (km, _) = karp.expect("karp finds a cycle");
            let (hm, _) = howard.expect("howard finds a cycle");
            assert!((km - hm).abs() < 1e-9, "karp {km} howard {hm}");
        }
    }

    #[test]
    fn bilateral_value_function_bounds_both_sides() {
        // two loops at A and B levels joined by steep edges: the one-sided
        // normalization would push an edge below A
        let g = TransferGraph::from_edge_list(
            2,
            &[
                (0, 0, 0.0, 0.0, 0),
                (1, 1, 0.0, 0.0, 0),
                (0, 1, -100.0, 0.0, 0),
                (1, 0, -100.0, 0.0, 0),
            ],
        );
        let (b, _) = g.max_cycle_mean().unwrap();
        let neg = TransferGraph::from_edge_list(
            2,
            &[
                (0, 0, 0.0, 0.0, 0),
                (1, 1, 0.0, 0.0, 0),
                (0, 1, 100.0, 0.0, 0),
                (1, 0, 100.0, 0.0, 0),
            ],
        );
        let (na, _) = neg.max_cycle_mean().unwrap();
        let a = -na;
        assert_eq!(b, 0.0);
        assert_eq!(a, -100.0);
        let u = g.bilateral_value_function(a, b).unwrap();
        for e in 0..g.edge_count() {
            let (s, d) = g.edge_endpoints(e as u32);
            let corrected = g.phi[e] + u[s as usize] - u[d as usize];
            assert!(corrected >= a - 1e-9 && corrected <= b + 1e-9, "{corrected}");
        }
    }

    #[test]
    fn restricted_entropy_of_golden_mean_subgraph() {
        let sft = Sft::golden_mean();
        let g = TransferGraph::from_adjacency(&sft);
        let nodes: Vec<u32> = (0..g.n() as u32).collect();
        let mask = vec![true; g.edge_count()];
        let h = g.restricted_adjacency_entropy(&nodes, &mask);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((h - phi.ln()).abs() < 1e-10);
    }
}
