//! Coupling and splicing: the geometric-gap measures nu_{eta,M}, the
//! connector-word maps, the splice edit map, and the experiment that
//! checks the entropy and integral bounds of the spliced measure
//! empirically against their exact right-hand sides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::potential::LocallyConstantPotential;
use crate::pressure::{block_entropy, entropy_and_integral, MarkovMeasure};
use crate::sft::{has_no_long_overlap, Sft, Word};

/// Parameters of the stationary binary process with independent geometric
/// gaps of at least M between 1s, with its closed-form frequency and
/// entropy.
#[derive(Clone, Copy, Debug)]
pub struct GapMeasureParams {
    pub eta: f64,
    /// Minimal gap M.
    pub min_gap: usize,
    /// Frequency of 1s: 1 / (M + e^-eta / (1 - e^-eta)).
    pub delta: f64,
    /// Entropy in nats, by the suspension computation.
    pub nu_entropy: f64,
}

/// Exact frequency and entropy of nu_{eta,M}.
pub fn nu_closed_form(eta: f64, min_gap: usize) -> Result<GapMeasureParams> {
    if !(eta > 0.0) || min_gap == 0 {
        return Err(Error::OutOfRange(
            "nu parameters need eta > 0 and M >= 1".into(),
        ));
    }
    let q = (-eta).exp();
    let mean_excess = q / (1.0 - q);
    let delta = 1.0 / (min_gap as f64 + mean_excess);
    let gap_entropy = -(1.0 - q).ln() + eta * mean_excess;
    let nu_entropy = gap_entropy * delta;
    Ok(GapMeasureParams {
        eta,
        min_gap,
        delta,
        nu_entropy,
    })
}

/// Stationary sample of nu_{eta,M}: 1-positions separated by M plus
/// geometric draws, with the first 1 at a residual-distributed offset.
pub fn sample_nu(params: &GapMeasureParams, length: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0u8; length];
    let mut pos = residual_offset(params, &mut rng);
    while pos < length {
        out[pos] = 1;
        pos += draw_gap(params, &mut rng);
    }
    out
}

fn draw_gap(params: &GapMeasureParams, rng: &mut impl Rng) -> usize {
    // the symbol M+k occurs with probability (1 - e^-eta) e^-k eta
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let k = (u.ln() / -params.eta).floor() as usize;
    params.min_gap + k
}

/// Offset of the first 1 at or after the origin under the stationary
/// process: P(R = r) = delta * P(G >= r + 1).
fn residual_offset(params: &GapMeasureParams, rng: &mut impl Rng) -> usize {
    let m = params.min_gap as f64;
    let u: f64 = rng.gen_range(0.0..1.0);
    if u < m * params.delta {
        return (u / params.delta) as usize;
    }
    // tail: P(R >= M + k) = delta e^-(k+1) eta / (1 - e^-eta)
    let w = u - m * params.delta;
    let q = (-params.eta).exp();
    let frac = 1.0 - w * (1.0 - q) / (params.delta * q);
    let k = if frac <= 0.0 {
        // numerically exhausted tail; extremely unlikely
        (1.0 / params.eta) as usize * 40
    } else {
        ((frac.ln() / -params.eta).ceil() as usize).saturating_sub(1)
    };
    params.min_gap + k
}

/// Renewal-CLT standard deviation of the empirical frequency of 1s.
pub fn nu_frequency_sigma(params: &GapMeasureParams, length: usize) -> f64 {
    let q = (-params.eta).exp();
    let var_gap = q / ((1.0 - q) * (1.0 - q));
    let mean_gap = 1.0 / params.delta;
    (var_gap / (mean_gap.powi(3) * length as f64)).sqrt()
}

/// Entropy-rate estimate from the empirical gap distribution (plug-in gap
/// entropy over the mean gap).
pub fn nu_entropy_estimate(sample: &[u8]) -> Option<f64> {
    let ones: Vec<usize> = sample
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(i, _)| i)
        .collect();
    if ones.len() < 2 {
        return None;
    }
    let gaps: Vec<usize> = ones.windows(2).map(|w| w[1] - w[0]).collect();
    let mut counts: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for &g in &gaps {
        *counts.entry(g).or_insert(0) += 1;
    }
    let total = gaps.len() as f64;
    let h_gap: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    let mean_gap = gaps.iter().sum::<usize>() as f64 / total;
    Some(h_gap / mean_gap)
}

/// Lexicographically minimal connector words: u'(a) with a u'(a) w_0
/// admissible and u''(a) with w_last u''(a) a admissible, for each symbol.
pub fn connector_words(sft: &Sft, w: &Word) -> Result<(Vec<Word>, Vec<Word>)> {
    let l = sft.mixing_length();
    let first = w.symbols()[0];
    let last = w.symbols()[w.len() - 1];
    let mut before = Vec::with_capacity(sft.alphabet_size());
    let mut after = Vec::with_capacity(sft.alphabet_size());
    for a in 0..sft.alphabet_size() as u8 {
        before.push(
            sft.connecting_word(a, first, l)
                .ok_or_else(|| Error::Misaligned(format!("no length-{l} connector {a} -> {first}")))?,
        );
        after.push(
            sft.connecting_word(last, a, l)
                .ok_or_else(|| Error::Misaligned(format!("no length-{l} connector {last} -> {a}")))?,
        );
    }
    Ok((before, after))
}

/// Configuration of one splice construction.
#[derive(Clone, Debug)]
pub struct SpliceConfig {
    pub sft: Sft,
    pub mu: MarkovMeasure,
    pub word: Word,
    pub eta: f64,
    pub sample_len: usize,
    pub seed: u64,
    /// Connector maps, one word per alphabet symbol.
    pub before: Vec<Word>,
    pub after: Vec<Word>,
}

impl SpliceConfig {
    pub fn new(
        sft: Sft,
        mu: MarkovMeasure,
        word: Word,
        eta: f64,
        sample_len: usize,
        seed: u64,
    ) -> Result<SpliceConfig> {
        let l = sft.mixing_length();
        if word.len() < 3 * l {
            return Err(Error::Hypothesis(format!(
                "|w| = {} below 3L = {}",
                word.len(),
                3 * l
            )));
        }
        if !sft.is_admissible(word.symbols()) {
            return Err(Error::Inadmissible(word.to_string()));
        }
        if !has_no_long_overlap(word.symbols()) {
            return Err(Error::Hypothesis(format!(
                "word {word} violates the no-long-overlaps condition"
            )));
        }
        let (before, after) = connector_words(&sft, &word)?;
        Ok(SpliceConfig {
            sft,
            mu,
            word,
            eta,
            sample_len,
            seed,
            before,
            after,
        })
    }

    /// M = |w| + 2L + 1, the spacing the gap measure must respect.
    pub fn min_gap(&self) -> usize {
        self.word.len() + 2 * self.sft.mixing_length() + 1
    }
}

/// The edit map: for each k with y_k = 1 replace
/// x[k .. k+2L+m) by u'(x_{k-1}) w u''(x_{k+2L+m}). Edits whose window or
/// context crosses the sample boundary are skipped.
pub fn splice_map(config: &SpliceConfig, x: &[u8], y: &[u8]) -> Result<Vec<u8>> {
    if x.len() != y.len() {
        return Err(Error::Misaligned(format!(
            "|x| = {} != |y| = {}",
            x.len(),
            y.len()
        )));
    }
    let l = config.sft.mixing_length();
    let m = config.word.len();
    let min_gap = config.min_gap();
    let mut z = x.to_vec();
    let mut last_one: Option<usize> = None;
    for (k, &bit) in y.iter().enumerate() {
        if bit != 1 {
            continue;
        }
        if let Some(prev) = last_one {
            if k - prev < min_gap {
                return Err(Error::Misaligned(format!(
                    "1s at {prev} and {k} closer than M = {min_gap}"
                )));
            }
        }
        last_one = Some(k);
        if k < 1 || k + 2 * l + m > x.len() - 1 {
            continue; // boundary edit skipped
        }
        let u_before = config.before[x[k - 1] as usize].symbols();
        let u_after = config.after[x[k + 2 * l + m] as usize].symbols();
        z[k..k + l].copy_from_slice(u_before);
        z[k + l..k + l + m].copy_from_slice(config.word.symbols());
        z[k + l + m..k + 2 * l + m].copy_from_slice(u_after);
    }
    Ok(z)
}

/// Plug-in block entropy rate H_n / n of an empirical sample.
pub fn empirical_block_entropy(sequence: &[u8], alphabet: usize, n: usize) -> Result<f64> {
    let need = 100usize.saturating_mul(alphabet.pow(n as u32));
    if sequence.len() < need {
        return Err(Error::InsufficientSample {
            got: sequence.len(),
            need,
        });
    }
    let bins = alphabet.pow(n as u32);
    let mut counts = vec![0u32; bins];
    let mut idx = 0usize;
    let top = bins / alphabet;
    for (i, &s) in sequence.iter().enumerate() {
        idx = (idx % top) * alphabet + s as usize;
        if i + 1 >= n {
            counts[idx] += 1;
        }
    }
    let total = (sequence.len() + 1 - n) as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    Ok(h / n as f64)
}

/// The eta tuning exp(-1 - c2 - c1 |t|) used when trading entropy gain
/// against integral loss at parameter t.
pub fn theorem11_eta(c1: f64, c2: f64, t: f64) -> f64 {
    (-1.0 - c2 - c1 * t.abs()).exp()
}

/// Full record of one splice experiment.
#[derive(Clone, Debug)]
pub struct SpliceReport {
    pub eta: f64,
    pub min_gap: usize,
    pub delta: f64,
    pub nu_entropy: f64,
    pub mu_entropy: f64,
    pub mu_integral: f64,
    pub mu_word_mass: f64,
    pub block_entropy_mu: f64,
    /// Entropy lower bound for the spliced measure (exact pieces).
    pub entropy_rhs: f64,
    /// Integral lower bound, with the Hölder-tail constant of the spec.
    pub integral_rhs: f64,
    /// Same bound with the table-variation constant instead.
    pub integral_rhs_table: f64,
    pub word_birkhoff_inf: f64,
    pub empirical_integral: f64,
    pub empirical_sigma: f64,
    /// (n, H_n/n) plug-in block entropies of the spliced sample.
    pub empirical_block: Vec<(usize, f64)>,
    pub integral_flag: bool,
    pub entropy_flag: bool,
    pub edits: usize,
    pub word_occurrences: usize,
    pub word_occurrences_bound: usize,
    pub sample_len: usize,
}

impl SpliceReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        use std::fmt::Write;
        let _ = writeln!(s, "eta = {:.17e}", self.eta);
        let _ = writeln!(s, "min_gap = {}", self.min_gap);
        let _ = writeln!(s, "delta = {:.17e}", self.delta);
        let _ = writeln!(s, "nu_entropy = {:.17e}", self.nu_entropy);
        let _ = writeln!(s, "mu_entropy = {:.17e}", self.mu_entropy);
        let _ = writeln!(s, "mu_integral = {:.17e}", self.mu_integral);
        let _ = writeln!(s, "mu_word_mass = {:.17e}", self.mu_word_mass);
        let _ = writeln!(s, "block_entropy_mu = {:.17e}", self.block_entropy_mu);
        let _ = writeln!(s, "entropy_rhs = {:.17e}", self.entropy_rhs);
        let _ = writeln!(s, "integral_rhs = {:.17e}", self.integral_rhs);
        let _ = writeln!(s, "integral_rhs_table = {:.17e}", self.integral_rhs_table);
        let _ = writeln!(s, "word_birkhoff_inf = {:.17e}", self.word_birkhoff_inf);
        let _ = writeln!(s, "empirical_integral = {:.17e}", self.empirical_integral);
        let _ = writeln!(s, "empirical_sigma = {:.17e}", self.empirical_sigma);
        for (n, h) in &self.empirical_block {
            let _ = writeln!(s, "empirical_block_{n} = {h:.17e}");
        }
        let _ = writeln!(s, "edits = {}", self.edits);
        let _ = writeln!(s, "word_occurrences = {}", self.word_occurrences);
        let _ = writeln!(s, "word_occurrences_bound = {}", self.word_occurrences_bound);
        let _ = writeln!(s, "sample_len = {}", self.sample_len);
        let _ = writeln!(s, "integral_flag = {}", self.integral_flag);
        let _ = writeln!(s, "entropy_flag = {}", self.entropy_flag);
        s
    }
}

fn count_occurrences(hay: &[u8], needle: &[u8]) -> usize {
    if needle.is_empty() || hay.len() < needle.len() {
        return 0;
    }
    hay.windows(needle.len()).filter(|w| *w == needle).count()
}

/// Run one splice experiment: exact bounds, a long sample of the spliced
/// process, and the empirical checks against both lemma right-hand sides.
pub fn splice_experiment(
    config: &SpliceConfig,
    pot: &LocallyConstantPotential,
) -> Result<SpliceReport> {
    let l = config.sft.mixing_length();
    let m = config.word.len();
    let min_gap = config.min_gap();
    let params = nu_closed_form(config.eta, min_gap)?;
    let mu_word_mass = config.mu.cylinder(&config.word);
    if params.delta <= mu_word_mass / 1.0f64.exp() {
        return Err(Error::Hypothesis(format!(
            "delta > e^-1 mu([w]) violated: delta = {:.3e}, e^-1 mu([w]) = {:.3e}",
            params.delta,
            mu_word_mass / 1.0f64.exp()
        )));
    }
    let (mu_entropy, mu_integral) = entropy_and_integral(&config.mu, pot)?;
    let block_len = 2 * l + m;
    let block_entropy_mu = block_entropy(&config.mu.refine_to(config.mu.order().max(2))?, block_len)?;
    let entropy_rhs = mu_entropy + params.nu_entropy
        - params.delta * block_entropy_mu
        - 6.0 * params.delta * 2.0f64.ln();
    let word_birkhoff_inf = pot.birkhoff_inf(&config.sft, &config.word)?;
    let holder_term =
        2.0 * params.delta * pot.holder_c * (l as f64 + 1.0 / (1.0 - pot.holder_alpha));
    let table_term =
        2.0 * params.delta * pot.oscillation() * (l as f64 + (pot.depth() as f64 - 1.0));
    let core = mu_integral + params.delta * (word_birkhoff_inf - m as f64 * mu_integral);
    let integral_rhs = core - holder_term;
    let integral_rhs_table = core - table_term;

    // sample and splice
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x = config.mu.sample(config.sample_len, &mut rng);
    let y = sample_nu(&params, config.sample_len, config.seed.wrapping_add(1));
    let z = splice_map(config, &x, &y)?;

    // empirical Birkhoff average of phi along z, batch-mean sigma
    let k = pot.depth();
    let windows = z.len() - k + 1;
    let batches = 100usize;
    let batch_len = windows / batches;
    let mut batch_means = Vec::with_capacity(batches);
    let mut total = 0.0;
    for b in 0..batches {
        let lo = b * batch_len;
        let hi = if b == batches - 1 { windows } else { lo + batch_len };
        let mut acc = 0.0;
        for i in lo..hi {
            acc += pot.value_of_window(&z[i..i + k]);
        }
        total += acc;
        batch_means.push(acc / (hi - lo) as f64);
    }
    let empirical_integral = total / windows as f64;
    let bm = batch_means.iter().sum::<f64>() / batches as f64;
    let var = batch_means
        .iter()
        .map(|&x| (x - bm) * (x - bm))
        .sum::<f64>()
        / (batches as f64 - 1.0);
    let empirical_sigma = (var / batches as f64).sqrt();

    // plug-in block entropies of the spliced sample
    let alphabet = config.sft.alphabet_size();
    let mut empirical_block = Vec::new();
    for n in [2usize, 4, 6, 8, 10, 12, 14, 16] {
        if 100usize.saturating_mul(alphabet.pow(n as u32)) <= z.len() {
            empirical_block.push((n, empirical_block_entropy(&z, alphabet, n)?));
        }
    }

    let edits = y.iter().filter(|&&b| b == 1).count();
    let word_occurrences = count_occurrences(&z, config.word.symbols());
    let word_occurrences_bound =
        3 * edits + count_occurrences(&x, config.word.symbols());

    let integral_flag = empirical_integral >= integral_rhs - 4.0 * empirical_sigma;
    let entropy_tol = 0.01;
    let entropy_flag = empirical_block
        .iter()
        .all(|&(_, h)| h >= entropy_rhs - entropy_tol);

    Ok(SpliceReport {
        eta: config.eta,
        min_gap,
        delta: params.delta,
        nu_entropy: params.nu_entropy,
        mu_entropy,
        mu_integral,
        mu_word_mass,
        block_entropy_mu,
        entropy_rhs,
        integral_rhs,
        integral_rhs_table,
        word_birkhoff_inf,
        empirical_integral,
        empirical_sigma,
        empirical_block,
        integral_flag,
        entropy_flag,
        edits,
        word_occurrences,
        word_occurrences_bound,
        sample_len: config.sample_len,
    })
}
