//! Ergodic optimization and the asymptotics of pressure functions:
//! maximal/minimal ergodic averages, max-plus normalization with a
//! two-sided value function, the maximizing subgraph and its entropy, the
//! slant asymptote, tangent and convexity gaps, and decay-rate fitting.

use crate::error::{Error, Result};
use crate::graph::{TransferGraph, TIGHT_TOL};
use crate::potential::{LocallyConstantPotential, TableRepr};
use crate::pressure::{
    entropy_and_integral, equilibrium_state, least_squares, pressure, PressureEngine,
};
use crate::sft::{Sft, Word};

/// A strongly connected piece of the maximizing subgraph.
#[derive(Clone, Debug)]
pub struct TightComponent {
    pub nodes: Vec<u32>,
    pub entropy: f64,
}

/// Everything the slant asymptote needs: the extreme ergodic averages, a
/// corrected potential, the maximizing subgraph and its entropy.
#[derive(Clone, Debug)]
pub struct AsymptoteData {
    /// B(phi), the maximal ergodic average.
    pub beta: f64,
    /// A(phi), the minimal ergodic average.
    pub a_min: f64,
    /// gamma = B - A.
    pub gamma: f64,
    /// Ground-state entropy: max entropy over tight components.
    pub b: f64,
    /// Value function u; phi_e + u(src) - u(dst) lies in [A, B] up to tol.
    pub value_function: Vec<f64>,
    pub tight_components: Vec<TightComponent>,
    pub tight_edge_mask: Vec<bool>,
    /// State labels when the underlying graph is an explicit word graph.
    pub state_words: Option<Vec<Word>>,
}

pub(crate) fn transfer_graph_for(
    sft: &Sft,
    pot: &LocallyConstantPotential,
) -> Result<TransferGraph> {
    match &pot.repr {
        TableRepr::Dense { .. } => TransferGraph::word_graph(sft, pot),
        TableRepr::Sunny { radius } => TransferGraph::sunny_automaton(sft, *radius),
        TableRepr::OrbitFixed {
            alphabet,
            a,
            alpha,
            radius,
            ..
        } => Ok(TransferGraph::orbit_fixed_automaton(
            *alphabet, *a, *alpha, *radius,
        )),
    }
}

/// Per-symbol values when the potential is a depth-1 table on a full shift
/// (the rank-one case with closed forms).
fn rank1_values<'p>(sft: &Sft, pot: &'p LocallyConstantPotential) -> Option<&'p [f64]> {
    if pot.depth() == 1 && sft.is_full_shift() {
        pot.dense().map(|(_, v)| v)
    } else {
        None
    }
}

/// B(phi) as the maximum mean cycle weight of the word graph.
pub fn max_cycle_mean(sft: &Sft, pot: &LocallyConstantPotential) -> Result<f64> {
    let g = transfer_graph_for(sft, pot)?;
    Ok(g.max_cycle_mean()
        .expect("transfer graphs always contain cycles")
        .0)
}

/// A(phi), by negating the weights.
pub fn min_cycle_mean(sft: &Sft, pot: &LocallyConstantPotential) -> Result<f64> {
    let g = transfer_graph_for(sft, pot)?.negated();
    Ok(-g
        .max_cycle_mean()
        .expect("transfer graphs always contain cycles")
        .0)
}

/// Max-plus normalization: extreme averages, a two-sided value function,
/// and the recurrent maximizing subgraph with its entropy.
pub fn maxplus_normalize(sft: &Sft, pot: &LocallyConstantPotential) -> Result<AsymptoteData> {
    let g = transfer_graph_for(sft, pot)?;
    asymptote_of_graph(&g)
}

pub(crate) fn asymptote_of_graph(g: &TransferGraph) -> Result<AsymptoteData> {
    let (beta, _) = g
        .max_cycle_mean()
        .ok_or_else(|| Error::OutOfRange("graph has no cycle".into()))?;
    let (neg_a, _) = g
        .negated()
        .max_cycle_mean()
        .ok_or_else(|| Error::OutOfRange("graph has no cycle".into()))?;
    let a_min = -neg_a;
    let value_function = g
        .bilateral_value_function(a_min, beta)
        .unwrap_or_else(|| g.one_sided_value_function(beta));
    let mut tight_edge_mask = vec![false; g.edge_count()];
    for e in 0..g.edge_count() {
        let (s, d) = g.edge_endpoints(e as u32);
        let corrected = g.phi[e] + value_function[s as usize] - value_function[d as usize];
        tight_edge_mask[e] = corrected >= beta - TIGHT_TOL;
    }
    let mut tight_components = Vec::new();
    let mut b = f64::NEG_INFINITY;
    for comp in g.sccs(None, Some(&tight_edge_mask)) {
        let has_edge = comp.iter().any(|&u| {
            g.out_edges(u).iter().any(|&e| {
                tight_edge_mask[e as usize] && comp.contains(&g.edge_endpoints(e).1)
            })
        });
        if !has_edge {
            continue;
        }
        let entropy = g.restricted_adjacency_entropy(&comp, &tight_edge_mask);
        b = b.max(entropy);
        tight_components.push(TightComponent {
            nodes: comp,
            entropy,
        });
    }
    if tight_components.is_empty() {
        return Err(Error::OutOfRange(
            "maximizing subgraph has no recurrent part".into(),
        ));
    }
    Ok(AsymptoteData {
        beta,
        a_min,
        gamma: beta - a_min,
        b,
        value_function,
        tight_components,
        tight_edge_mask,
        state_words: g.words.clone(),
    })
}

/// Gap to the slant asymptote: p(t) - (b + beta t), with enclosure.
///
/// Depth-1 tables on full shifts take a cancellation-free closed form
/// (needed once the gap falls below the float resolution of p itself).
pub fn gap_infinity(sft: &Sft, pot: &LocallyConstantPotential, t: f64) -> Result<(f64, f64)> {
    if let Some(values) = rank1_values(sft, pot) {
        return Ok(rank1_gap_infinity(values, t));
    }
    let asym = maxplus_normalize(sft, pot)?;
    let p = pressure(sft, pot, t)?;
    Ok((p.value - asym.b - asym.beta * t, p.enclosure))
}

fn rank1_gap_infinity(values: &[f64], t: f64) -> (f64, f64) {
    let beta = values.iter().cloned().fold(f64::MIN, f64::max);
    let mult = values.iter().filter(|&&c| c == beta).count() as f64;
    let terms: Vec<f64> = values
        .iter()
        .filter(|&&c| c != beta)
        .map(|&c| t * (c - beta))
        .collect();
    if terms.is_empty() {
        return (0.0, f64::MIN_POSITIVE);
    }
    // gap = log(1 + sum exp(terms)/mult), as a stable softplus
    let x = crate::pressure::logsumexp(terms) - mult.ln();
    let gap = if x > 35.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    (gap, gap.abs() * 1e-14 + f64::MIN_POSITIVE)
}

/// Gap curve over a t-grid, reusing one engine and one normalization.
pub fn gap_curve(
    sft: &Sft,
    pot: &LocallyConstantPotential,
    ts: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    if let Some(values) = rank1_values(sft, pot) {
        return Ok(ts
            .iter()
            .map(|&t| {
                let (g, e) = rank1_gap_infinity(values, t);
                (t, g, e)
            })
            .collect());
    }
    let asym = maxplus_normalize(sft, pot)?;
    let mut engine = PressureEngine::new(sft, pot)?;
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let p = engine.pressure(t)?;
        out.push((t, p.value - asym.b - asym.beta * t, p.enclosure));
    }
    Ok(out)
}

/// Gap to the tangent line at t, evaluated at s:
/// p(s) - (h(mu_t) + s * integral(phi dmu_t)).
pub fn tangent_gap(sft: &Sft, pot: &LocallyConstantPotential, t: f64, s: f64) -> Result<f64> {
    let m = equilibrium_state(sft, pot, t)?;
    let (h, i) = entropy_and_integral(&m, pot)?;
    let p = pressure(sft, pot, s)?;
    Ok(p.value - (h + s * i))
}

/// Midpoint convexity gap (p(t+h) + p(t-h))/2 - p(t), with enclosure.
///
/// Depth-1 tables on full shifts use the exact pair identity
/// S+ S- - S0^2 = sum_{i<j} w_i w_j 4 sinh^2(d h / 2), evaluated in log
/// domain; the generic route takes plain second differences.
pub fn convexity_gap(
    sft: &Sft,
    pot: &LocallyConstantPotential,
    t: f64,
    h: f64,
) -> Result<(f64, f64)> {
    if h <= 0.0 {
        return Err(Error::OutOfRange("convexity step h must be positive".into()));
    }
    if let Some(values) = rank1_values(sft, pot) {
        return Ok(rank1_convexity_gap(values, t, h));
    }
    let mut engine = PressureEngine::new(sft, pot)?;
    let pm = engine.pressure(t - h)?;
    let p0 = engine.pressure(t)?;
    let pp = engine.pressure(t + h)?;
    let gap = 0.5 * (pp.value + pm.value) - p0.value;
    let encl = 0.5 * (pp.enclosure + pm.enclosure)
        + p0.enclosure
        + 4.0 * f64::EPSILON * (1.0 + p0.value.abs());
    Ok((gap, encl))
}

fn rank1_convexity_gap(values: &[f64], t: f64, h: f64) -> (f64, f64) {
    let log_s0 = crate::pressure::logsumexp(values.iter().map(|&c| t * c));
    let mut terms = Vec::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = values[i] - values[j];
            if d == 0.0 {
                continue;
            }
            let sh = (d.abs() * h / 2.0).sinh();
            terms.push(t * (values[i] + values[j]) + (4.0 * sh * sh).ln() - 2.0 * log_s0);
        }
    }
    if terms.is_empty() {
        return (0.0, f64::MIN_POSITIVE);
    }
    let x = crate::pressure::logsumexp(terms.iter().cloned()).exp();
    let gap = 0.5 * x.ln_1p();
    (gap, gap.abs() * 1e-14 + f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exponential,
    SubExponential,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Exponential => "exponential",
            Verdict::SubExponential => "sub-exponential",
            Verdict::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// Fitted decay of a gap curve.
#[derive(Clone, Debug)]
pub struct DecayFit {
    /// The usable (t, gap) pairs the fit ran on.
    pub grid: Vec<(f64, f64)>,
    /// Least-squares slope of -log(gap) against t.
    pub rate: f64,
    pub prefactor: f64,
    pub residual: f64,
    pub verdict: Verdict,
    pub usable: usize,
}

/// Fit -log(gap) against t on the points standing clear of their
/// enclosures. Fewer than 8 usable points yields an indeterminate verdict.
pub fn fit_decay(grid: &[(f64, f64, f64)]) -> DecayFit {
    let mut usable: Vec<(f64, f64)> = grid
        .iter()
        .filter(|&&(_, gap, encl)| gap > 10.0 * encl && gap > 0.0)
        .map(|&(t, gap, _)| (t, gap))
        .collect();
    usable.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if usable.len() < 8 {
        return DecayFit {
            grid: usable.clone(),
            rate: f64::NAN,
            prefactor: f64::NAN,
            residual: f64::NAN,
            verdict: Verdict::Indeterminate,
            usable: usable.len(),
        };
    }
    let xs: Vec<f64> = usable.iter().map(|&(t, _)| t).collect();
    let ys: Vec<f64> = usable.iter().map(|&(_, g)| -g.ln()).collect();
    let (a, c, residual) = least_squares(&xs, &ys);
    let rate = c;
    let prefactor = (-a).exp();
    let verdict = if residual < 0.05 && rate > 0.0 {
        Verdict::Exponential
    } else {
        // -log(gap)/t decreasing toward 0 across the top half of the grid
        let rs: Vec<f64> = usable
            .iter()
            .filter(|&&(t, _)| t > 0.0)
            .map(|&(t, g)| -g.ln() / t)
            .collect();
        let top = &rs[rs.len() / 2..];
        let decreasing = top.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        if top.len() >= 2 && decreasing && *top.last().unwrap() > 0.0 {
            Verdict::SubExponential
        } else {
            Verdict::Indeterminate
        }
    };
    DecayFit {
        grid: usable.clone(),
        rate,
        prefactor,
        residual,
        verdict,
        usable: usable.len(),
    }
}

/// Words of the given length whose corrected Birkhoff average clears the
/// heavy (above B - gamma/4) or light (below A + gamma/4) threshold.
pub fn heavy_light_words(
    sft: &Sft,
    pot: &LocallyConstantPotential,
    length: usize,
) -> Result<(Vec<Word>, Vec<Word>)> {
    let asym = maxplus_normalize(sft, pot)?;
    if asym.gamma <= 1e-9 {
        return Err(Error::Hypothesis(
            "potential is cohomologous to a constant (gamma = 0)".into(),
        ));
    }
    let g = transfer_graph_for(sft, pot)?;
    let words = g
        .words
        .as_ref()
        .ok_or_else(|| Error::OutOfRange("heavy/light words need a dense table".into()))?;
    let kp = pot.depth().max(2);
    if length < kp {
        return Err(Error::OutOfRange(format!(
            "length {length} below the word-graph order {kp}"
        )));
    }
    let index: std::collections::HashMap<&[u8], u32> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.symbols(), i as u32))
        .collect();
    let heavy_cut = asym.beta - asym.gamma / 4.0;
    let light_cut = asym.a_min + asym.gamma / 4.0;
    let mut heavy = Vec::new();
    let mut light = Vec::new();
    for w in sft.enumerate_words(length)? {
        let windows = (length - pot.depth() + 1) as f64;
        let first = index[&w.symbols()[..kp]] as usize;
        let last = index[&w.symbols()[length - kp..]] as usize;
        let sum = pot.birkhoff_sum(&w)? + asym.value_function[first]
            - asym.value_function[last];
        let avg = sum / windows;
        if avg > heavy_cut {
            heavy.push(w.clone());
        }
        if avg < light_cut {
            light.push(w);
        }
    }
    if heavy.is_empty() {
        return Err(Error::EmptyAtLength {
            kind: "heavy",
            len: length,
        });
    }
    if light.is_empty() {
        return Err(Error::EmptyAtLength {
            kind: "light",
            len: length,
        });
    }
    Ok((heavy, light))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_potential, PotentialSpec};

    fn coord(sft: &Sft, values: &[f64]) -> LocallyConstantPotential {
        LocallyConstantPotential::from_symbol_values(sft, values).unwrap()
    }

    #[test]
    fn max_cycle_mean_full_shift_depth_1() {
        let sft = Sft::full_shift(3);
        let pot = coord(&sft, &[0.2, -0.7, 0.9]);
        assert_eq!(max_cycle_mean(&sft, &pot).unwrap(), 0.9);
    }

    #[test]
    fn max_cycle_mean_golden_mean_alternating() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 1.0]);
        let b = max_cycle_mean(&sft, &pot).unwrap();
        assert!((b - 0.5).abs() < 1e-12); // cycle 01
    }

    #[test]
    fn brute_force_cycle_oracle_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let n = rng.gen_range(2..=6usize);
            let mut list = Vec::new();
            for v in 0..n as u32 {
                list.push((v, (v + 1) % n as u32, rng.gen_range(-1.0..1.0), 0.0, 0u8));
            }
            for _ in 0..rng.gen_range(1..2 * n) {
                let u = rng.gen_range(0..n) as u32;
                let v = rng.gen_range(0..n) as u32;
                list.push((u, v, rng.gen_range(-1.0..1.0), 0.0, 0u8));
            }
            let g = TransferGraph::from_edge_list(n, &list);
            let (mean, _) = g.max_cycle_mean().unwrap();
            let oracle = brute_force_max_mean(&g);
            assert_eq!(mean, oracle, "engine {mean} oracle {oracle}");
        }
    }

    /// Exhaustive simple-cycle enumeration, canonical means.
    fn brute_force_max_mean(g: &TransferGraph) -> f64 {
        let n = g.n();
        let mut best = f64::NEG_INFINITY;
        for start in 0..n as u32 {
            let mut path = vec![start];
            let mut on_path = vec![false; n];
            on_path[start as usize] = true;
            dfs(g, start, start, &mut path, &mut on_path, &mut best);
        }
        best
    }

    fn dfs(
        g: &TransferGraph,
        start: u32,
        cur: u32,
        path: &mut Vec<u32>,
        on_path: &mut [bool],
        best: &mut f64,
    ) {
        for &e in g.out_edges(cur) {
            let (_, v) = g.edge_endpoints(e);
            if v == start {
                let mean = g.canonical_cycle_mean(path);
                if mean > *best {
                    *best = mean;
                }
            } else if v > start && !on_path[v as usize] {
                on_path[v as usize] = true;
                path.push(v);
                dfs(g, start, v, path, on_path, best);
                path.pop();
                on_path[v as usize] = false;
            }
        }
    }

    #[test]
    fn maxplus_point_mass_ground_state() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let asym = maxplus_normalize(&sft, &pot).unwrap();
        assert!((asym.beta - 0.0).abs() < 1e-12);
        assert!(asym.b.abs() < 1e-12);
        assert_eq!(asym.tight_components.len(), 1);
        let comp = &asym.tight_components[0];
        let words = asym.state_words.as_ref().unwrap();
        assert_eq!(comp.nodes.len(), 1);
        assert_eq!(words[comp.nodes[0] as usize].to_string(), "00");
    }

    #[test]
    fn maxplus_two_symbol_ground_state() {
        let sft = Sft::full_shift(3);
        let pot = coord(&sft, &[1.0, 1.0, 0.0]);
        let asym = maxplus_normalize(&sft, &pot).unwrap();
        assert!((asym.beta - 1.0).abs() < 1e-12);
        assert!((asym.b - 2.0f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn maxplus_constant_potential() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.3, 0.3]);
        let asym = maxplus_normalize(&sft, &pot).unwrap();
        assert!((asym.beta - 0.3).abs() < 1e-12);
        assert!(asym.gamma.abs() < 1e-12);
        assert!((asym.b - sft.topological_entropy()).abs() < 1e-10);
    }

    #[test]
    fn corrected_potential_within_extreme_averages() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let sft = if rng.gen() {
                Sft::full_shift(2)
            } else {
                Sft::golden_mean()
            };
            let words = sft.enumerate_words(2).unwrap();
            let entries: Vec<(String, f64)> = words
                .iter()
                .map(|w| (w.to_string(), rng.gen_range(-1.0..1.0)))
                .collect();
            let refs: Vec<(&str, f64)> = entries.iter().map(|(s, v)| (s.as_str(), *v)).collect();
            let pot = LocallyConstantPotential::from_table(&sft, &refs).unwrap();
            let asym = maxplus_normalize(&sft, &pot).unwrap();
            let g = transfer_graph_for(&sft, &pot).unwrap();
            for e in 0..g.edge_count() {
                let (s, d) = g.edge_endpoints(e as u32);
                let corrected = g.phi[e] + asym.value_function[s as usize]
                    - asym.value_function[d as usize];
                assert!(
                    corrected <= asym.beta + 1e-9 && corrected >= asym.a_min - 1e-9,
                    "corrected {corrected} outside [{}, {}]",
                    asym.a_min,
                    asym.beta
                );
            }
        }
    }

    #[test]
    fn beta_shifts_with_constants_b_does_not() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let shifted = coord(&sft, &[0.4, -0.6]);
        let a1 = maxplus_normalize(&sft, &pot).unwrap();
        let a2 = maxplus_normalize(&sft, &shifted).unwrap();
        assert!((a2.beta - (a1.beta + 0.4)).abs() < 1e-12);
        assert!((a2.b - a1.b).abs() < 1e-12);
    }

    #[test]
    fn gap_infinity_closed_form_example() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        for t in [0.5, 5.0, 30.0, 80.0] {
            let (gap, _) = gap_infinity(&sft, &pot, t).unwrap();
            let expect = (-t as f64).exp().ln_1p();
            assert!(
                (gap - expect).abs() <= 1e-14 * (1.0 + expect.abs()),
                "t {t}: {gap} vs {expect}"
            );
        }
    }

    #[test]
    fn gap_infinity_constant_potential_is_zero() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.7, 0.7]);
        let (gap, _) = gap_infinity(&sft, &pot, 11.0).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn gap_infinity_example_4_2_rate() {
        // distinct max: gap(t) = log(1 + sum_j exp(-(c_max - c_j) t))
        let sft = Sft::full_shift(3);
        let c = [0.0, -1.0, -2.5];
        let pot = coord(&sft, &c);
        let t = 12.0;
        let (gap, _) = gap_infinity(&sft, &pot, t).unwrap();
        let expect = ((-1.0f64 * t).exp() + (-2.5f64 * t).exp()).ln_1p();
        assert!((gap - expect).abs() < 1e-15 + 1e-12 * expect);
    }

    #[test]
    fn gap_infinity_nonnegative_for_locally_constant() {
        let sft = Sft::golden_mean();
        let pot = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 0.3), ("01", -0.8), ("10", 0.2)],
        )
        .unwrap();
        for t in [-8.0, -1.0, 0.0, 2.0, 9.0] {
            let (gap, _) = gap_infinity(&sft, &pot, t).unwrap();
            assert!(gap >= -1e-10, "t {t}: {gap}");
        }
    }

    #[test]
    fn tangent_gap_examples() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        // s = t vanishes
        let g = tangent_gap(&sft, &pot, 1.3, 1.3).unwrap();
        assert!(g.abs() < 1e-9);
        // closed-form arithmetic at t=0, s=1
        let g = tangent_gap(&sft, &pot, 0.0, 1.0).unwrap();
        let expect = (1.0 + (-1.0f64).exp()).ln() - (2.0f64.ln() - 0.5);
        assert!((g - expect).abs() < 1e-10, "{g} vs {expect}");
        // constant potential: identically zero
        let cpot = coord(&sft, &[0.2, 0.2]);
        let g = tangent_gap(&sft, &cpot, 2.0, 5.0).unwrap();
        assert!(g.abs() < 1e-10);
    }

    #[test]
    fn convexity_gap_closed_form_example() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let (gap, _) = convexity_gap(&sft, &pot, 0.0, 1.0).unwrap();
        let expect = ((1.0 + (-1.0f64).exp()).ln() + (1.0 + 1.0f64.exp()).ln()) / 2.0
            - 2.0f64.ln();
        assert!((gap - expect).abs() < 1e-12, "{gap} vs {expect}");
    }

    #[test]
    fn convexity_gap_agrees_with_second_differences() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        for (t, h) in [(2.0, 1.0), (-3.0, 0.5), (5.0, 2.0)] {
            let (exact, _) = convexity_gap(&sft, &pot, t, h).unwrap();
            let pp = pressure(&sft, &pot, t + h).unwrap().value;
            let pm = pressure(&sft, &pot, t - h).unwrap().value;
            let p0 = pressure(&sft, &pot, t).unwrap().value;
            let fd = 0.5 * (pp + pm) - p0;
            assert!((exact - fd).abs() < 1e-11, "t {t} h {h}: {exact} vs {fd}");
        }
    }

    #[test]
    fn convexity_gap_constant_potential_is_exactly_zero() {
        let sft = Sft::full_shift(4);
        let pot = coord(&sft, &[0.3, 0.3, 0.3, 0.3]);
        let (gap, _) = convexity_gap(&sft, &pot, 7.0, 0.5).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn convexity_gap_small_h_matches_curvature_scale() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        // gap ~ h^2/2 p''(t); p'' at t=0 is Var = 1/4
        let (g1, _) = convexity_gap(&sft, &pot, 0.0, 1e-3).unwrap();
        assert!((g1 / (1e-6) - 0.125).abs() < 1e-3, "{}", g1 / 1e-6);
    }

    #[test]
    fn fit_decay_recovers_exponent() {
        let grid: Vec<(f64, f64, f64)> = (10..=30)
            .map(|i| {
                let t = i as f64;
                ((t), (-t).exp().ln_1p(), 1e-17)
            })
            .collect();
        let fit = fit_decay(&grid);
        assert_eq!(fit.verdict, Verdict::Exponential);
        assert!((fit.rate - 1.0).abs() < 0.02, "rate {}", fit.rate);
        assert!(fit.residual < 0.05);
    }

    #[test]
    fn fit_decay_flags_subexponential() {
        let grid: Vec<(f64, f64, f64)> = (1..=20)
            .map(|i| {
                let t = (2.0f64).powi(i);
                let gap = (t.log2().log2().max(0.1)) / t.log2();
                (t, gap, 1e-15)
            })
            .collect();
        let fit = fit_decay(&grid);
        assert_eq!(fit.verdict, Verdict::SubExponential);
    }

    #[test]
    fn fit_decay_insufficient_points() {
        let grid = vec![(1.0, 0.5, 1e-3), (2.0, 0.4, 1e-3), (3.0, 0.5, 0.2)];
        let fit = fit_decay(&grid);
        assert_eq!(fit.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn heavy_light_words_coordinate() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.0, -1.0]);
        let (heavy, light) = heavy_light_words(&sft, &pot, 6).unwrap();
        assert!(heavy.iter().any(|w| w.to_string() == "000000"));
        assert!(light.iter().any(|w| w.to_string() == "111111"));
    }

    #[test]
    fn heavy_light_rejects_constant() {
        let sft = Sft::full_shift(2);
        let pot = coord(&sft, &[0.5, 0.5]);
        assert!(matches!(
            heavy_light_words(&sft, &pot, 6),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn heavy_light_golden_mean() {
        let sft = Sft::golden_mean();
        let pot = coord(&sft, &[0.0, 1.0]);
        let (_, light) = heavy_light_words(&sft, &pot, 6).unwrap();
        assert!(light.iter().any(|w| w.to_string() == "000000"));
    }

    #[test]
    fn sunny_asymptote_has_spacing_subshift_entropy() {
        // tight structure of the depth-(2r+1) sunny table: 1s at gaps
        // > 2r; entropy is the log root of x^(2r+1) = x^(2r) + 1
        let sft = Sft::full_shift(2);
        let pot = build_potential(&sft, &PotentialSpec::DistSunny, 9).unwrap();
        let asym = maxplus_normalize(&sft, &pot).unwrap();
        let r = 4.0;
        let root = {
            let n = 2.0 * r + 1.0;
            let mut x = 1.2f64;
            for _ in 0..200 {
                let f = x.powf(n) - x.powf(n - 1.0) - 1.0;
                let fp = n * x.powf(n - 1.0) - (n - 1.0) * x.powf(n - 2.0);
                x -= f / fp;
            }
            x
        };
        assert!((asym.beta + 2.0f64.powi(-5)).abs() < 1e-12, "{}", asym.beta);
        assert!((asym.b - root.ln()).abs() < 1e-8, "{} vs {}", asym.b, root.ln());
    }
}
