//! Depth-k locally constant potentials, including truncations of the
//! distance-type Hölder potentials used throughout the experiments.
//!
//! A potential is stored either as a dense table over the admissible
//! k-words or, for the two distance families whose tables are too large to
//! enumerate (distance to the sunny-side-up system, distance to a fixed
//! point on a full shift), as a closed-form rule evaluated per window.
//! Distance variants use a symmetric window of radius r = (depth-1)/2
//! centred at the origin and take the infimum of the potential over the
//! cylinder; the distance to the intended Hölder function is tracked in
//! `truncation_error`.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sft::{Sft, Word};

/// Dense tables are refused above this many admissible words; the engine's
/// transfer-matrix budget has the same size.
pub const TABLE_BUDGET: usize = 10_000;

/// How a potential was specified.
#[derive(Clone, Debug)]
pub enum PotentialSpec {
    /// Values keyed by admissible word strings; depth is the key length.
    ExplicitTable { table: BTreeMap<String, f64> },
    /// phi(x) = values[x_0].
    Coordinate { values: Vec<f64> },
    /// phi(x) = -a * d_alpha(x, orbit of p).
    DistOrbit { orbit: Word, a: f64, alpha: f64 },
    /// phi(x) = -d(x, S) with S the at-most-one-1 system on a binary shift.
    DistSunny,
    /// phi(x) = -d(x, S) with S approximated by the set of points whose
    /// centred windows occur inside the given word list.
    DistSubshift { words: Vec<Word> },
}

#[derive(Deserialize)]
struct PotentialSpecFile {
    variant: String,
    #[serde(default)]
    depth: Option<usize>,
    #[serde(default)]
    values: Option<Vec<f64>>,
    #[serde(default)]
    table: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    orbit: Option<String>,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    words: Option<Vec<String>>,
}

impl PotentialSpec {
    /// Parse the structured spec format. Returns the spec and the file's
    /// depth field when present.
    pub fn parse(text: &str) -> Result<(PotentialSpec, Option<usize>)> {
        let f: PotentialSpecFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let missing = |field: &str| Error::Parse {
            location: format!("variant {:?}", f.variant),
            message: format!("missing field {field:?}"),
        };
        let spec = match f.variant.as_str() {
            "explicit-table" => PotentialSpec::ExplicitTable {
                table: f.table.ok_or_else(|| missing("table"))?,
            },
            "coordinate" => PotentialSpec::Coordinate {
                values: f.values.ok_or_else(|| missing("values"))?,
            },
            "dist-orbit" => PotentialSpec::DistOrbit {
                orbit: Word::parse(&f.orbit.ok_or_else(|| missing("orbit"))?)?,
                a: f.a.unwrap_or(1.0),
                alpha: f.alpha.unwrap_or(0.5),
            },
            "dist-sunny" => PotentialSpec::DistSunny,
            "dist-subshift" => PotentialSpec::DistSubshift {
                words: f
                    .words
                    .ok_or_else(|| missing("words"))?
                    .iter()
                    .map(|s| Word::parse(s))
                    .collect::<Result<_>>()?,
            },
            other => {
                return Err(Error::Parse {
                    location: "variant".into(),
                    message: format!("unknown variant {other:?}"),
                })
            }
        };
        Ok((spec, f.depth))
    }

    /// Sup-norm bound between the intended Hölder potential and its
    /// depth-truncated table. Zero for genuinely locally constant variants.
    pub fn truncation_bound(&self, depth: usize) -> f64 {
        let r = (depth.saturating_sub(1) / 2) as i32;
        match self {
            PotentialSpec::ExplicitTable { .. } | PotentialSpec::Coordinate { .. } => 0.0,
            PotentialSpec::DistOrbit { a, alpha, .. } => a * alpha.powi(r),
            PotentialSpec::DistSunny | PotentialSpec::DistSubshift { .. } => (2.0f64).powi(-r),
        }
    }

    fn is_distance(&self) -> bool {
        matches!(
            self,
            PotentialSpec::DistOrbit { .. }
                | PotentialSpec::DistSunny
                | PotentialSpec::DistSubshift { .. }
        )
    }
}

#[derive(Clone, Debug)]
pub(crate) enum TableRepr {
    Dense {
        words: Vec<Word>,
        index: HashMap<Box<[u8]>, u32>,
        values: Vec<f64>,
    },
    /// Closed-form rule for the sunny-side-up distance on a binary shift.
    Sunny { radius: usize },
    /// Closed-form rule for -a d_alpha(x, fixed point of `symbol`) on a
    /// full shift.
    OrbitFixed {
        symbol: u8,
        alphabet: usize,
        a: f64,
        alpha: f64,
        radius: usize,
    },
}

/// A depth-k locally constant potential with Hölder metadata.
#[derive(Clone, Debug)]
pub struct LocallyConstantPotential {
    depth: usize,
    pub(crate) repr: TableRepr,
    pub holder_c: f64,
    pub holder_alpha: f64,
    pub truncation_error: f64,
}

impl LocallyConstantPotential {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Depth-1 table from per-symbol values, for tests and presets.
    pub fn from_symbol_values(sft: &Sft, values: &[f64]) -> Result<LocallyConstantPotential> {
        build_potential(
            sft,
            &PotentialSpec::Coordinate {
                values: values.to_vec(),
            },
            1,
        )
    }

    /// Explicit table from (word, value) pairs, for tests and presets.
    pub fn from_table(sft: &Sft, entries: &[(&str, f64)]) -> Result<LocallyConstantPotential> {
        let table = entries
            .iter()
            .map(|&(w, v)| (w.to_string(), v))
            .collect::<BTreeMap<_, _>>();
        let depth = entries.first().map_or(1, |(w, _)| w.len());
        build_potential(sft, &PotentialSpec::ExplicitTable { table }, depth)
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, TableRepr::Dense { .. })
    }

    /// Dense table contents (admissible k-words with their values), when
    /// the representation is dense.
    pub fn dense(&self) -> Option<(&[Word], &[f64])> {
        match &self.repr {
            TableRepr::Dense { words, values, .. } => Some((words, values)),
            _ => None,
        }
    }

    /// Table value on one admissible k-window.
    pub fn value_of_window(&self, window: &[u8]) -> f64 {
        debug_assert_eq!(window.len(), self.depth);
        match &self.repr {
            TableRepr::Dense { index, values, .. } => {
                let id = index
                    .get(window)
                    .unwrap_or_else(|| panic!("window {window:?} not admissible"));
                values[*id as usize]
            }
            TableRepr::Sunny { radius } => sunny_window_value(window, *radius),
            TableRepr::OrbitFixed {
                symbol,
                a,
                alpha,
                radius,
                ..
            } => orbit_fixed_window_value(window, *symbol, *a, *alpha, *radius),
        }
    }

    /// Sum of the table over the |w|-k+1 sliding k-windows of w.
    pub fn birkhoff_sum(&self, w: &Word) -> Result<f64> {
        if w.len() < self.depth {
            return Err(Error::WordTooShort {
                got: w.len(),
                depth: self.depth,
            });
        }
        Ok(w.symbols()
            .windows(self.depth)
            .map(|win| self.value_of_window(win))
            .sum())
    }

    /// Cylinder infimum of the |w|-term Birkhoff sum: the window sum plus
    /// the minimum over admissible completions of the k-1 terms that peek
    /// past the end of the word.
    pub fn birkhoff_inf(&self, sft: &Sft, w: &Word) -> Result<f64> {
        let k = self.depth();
        let windows = self.birkhoff_sum(w)?;
        if k == 1 {
            return Ok(windows);
        }
        let suffix = &w.symbols()[w.len() - (k - 1)..];
        Ok(windows + self.tail_min(sft, suffix, k - 1))
    }

    fn tail_min(&self, sft: &Sft, state: &[u8], remaining: usize) -> f64 {
        if remaining == 0 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for s in 0..sft.alphabet_size() as u8 {
            if !sft.allowed(state[state.len() - 1], s) {
                continue;
            }
            let mut window = state.to_vec();
            window.push(s);
            let value = self.value_of_window(&window);
            let next = &window[1..];
            let rest = self.tail_min(sft, next, remaining - 1);
            best = best.min(value + rest);
        }
        best
    }

    /// Largest table value.
    pub fn max_value(&self) -> f64 {
        match &self.repr {
            TableRepr::Dense { values, .. } => values.iter().cloned().fold(f64::MIN, f64::max),
            TableRepr::Sunny { radius } => -(2.0f64).powi(-(*radius as i32) - 1),
            TableRepr::OrbitFixed {
                a, alpha, radius, ..
            } => -a * alpha.powi(*radius as i32 + 1),
        }
    }

    /// Smallest table value.
    pub fn min_value(&self) -> f64 {
        match &self.repr {
            TableRepr::Dense { values, .. } => values.iter().cloned().fold(f64::MAX, f64::min),
            TableRepr::Sunny { .. } => -0.5,
            TableRepr::OrbitFixed { a, .. } => -a,
        }
    }

    pub fn oscillation(&self) -> f64 {
        self.max_value() - self.min_value()
    }

    pub fn max_abs(&self) -> f64 {
        self.max_value().abs().max(self.min_value().abs())
    }
}

/// Build the depth-truncated table of a potential spec over an SFT.
pub fn build_potential(
    sft: &Sft,
    spec: &PotentialSpec,
    depth: usize,
) -> Result<LocallyConstantPotential> {
    if depth == 0 {
        return Err(Error::OutOfRange("depth must be positive".into()));
    }
    if spec.is_distance() && depth % 2 == 0 {
        return Err(Error::DepthParity(depth));
    }
    let radius = (depth - 1) / 2;
    let truncation_error = spec.truncation_bound(depth);

    match spec {
        PotentialSpec::ExplicitTable { table } => {
            let words = sft.enumerate_words(depth)?;
            if words.len() > TABLE_BUDGET {
                return Err(Error::TooLarge {
                    what: "dense potential table",
                    size: words.len(),
                    budget: TABLE_BUDGET,
                });
            }
            let mut values = Vec::with_capacity(words.len());
            for w in &words {
                let key = w.to_string();
                match table.get(&key) {
                    Some(&v) if v.is_finite() => values.push(v),
                    Some(_) => {
                        return Err(Error::Parse {
                            location: format!("table[{key:?}]"),
                            message: "value must be finite".into(),
                        })
                    }
                    None => {
                        return Err(Error::Parse {
                            location: format!("table[{key:?}]"),
                            message: "missing admissible word".into(),
                        })
                    }
                }
            }
            for key in table.keys() {
                let w = Word::parse(key)?;
                if w.len() != depth {
                    return Err(Error::Parse {
                        location: format!("table[{key:?}]"),
                        message: format!("key length {} != depth {depth}", w.len()),
                    });
                }
                if !sft.is_admissible(w.symbols()) {
                    return Err(Error::Inadmissible(key.clone()));
                }
            }
            let osc = osc_of(&values);
            Ok(LocallyConstantPotential {
                depth,
                repr: dense_repr(words, values),
                holder_c: osc,
                holder_alpha: 0.5,
                truncation_error,
            })
        }
        PotentialSpec::Coordinate { values } => {
            if values.len() != sft.alphabet_size() {
                return Err(Error::Parse {
                    location: "values".into(),
                    message: format!(
                        "expected {} per-symbol values, got {}",
                        sft.alphabet_size(),
                        values.len()
                    ),
                });
            }
            if depth % 2 == 0 {
                return Err(Error::DepthParity(depth));
            }
            let words = sft.enumerate_words(depth)?;
            if words.len() > TABLE_BUDGET {
                return Err(Error::TooLarge {
                    what: "dense potential table",
                    size: words.len(),
                    budget: TABLE_BUDGET,
                });
            }
            let vals: Vec<f64> = words
                .iter()
                .map(|w| values[w.symbols()[radius] as usize])
                .collect();
            let osc = osc_of(&vals);
            Ok(LocallyConstantPotential {
                depth,
                repr: dense_repr(words, vals),
                holder_c: osc,
                holder_alpha: 0.5,
                truncation_error,
            })
        }
        PotentialSpec::DistSunny => {
            if sft.alphabet_size() != 2 {
                return Err(Error::OutOfRange(
                    "dist-sunny needs a binary alphabet".into(),
                ));
            }
            build_distance_table(sft, depth, radius, 1.0, 0.5, truncation_error, |w| {
                sunny_window_value(w, radius)
            })
            .map(|repr| match repr {
                Some(dense) => dense,
                None => LocallyConstantPotential {
                    depth,
                    repr: TableRepr::Sunny { radius },
                    holder_c: 1.0,
                    holder_alpha: 0.5,
                    truncation_error,
                },
            })
        }
        PotentialSpec::DistOrbit { orbit, a, alpha } => {
            if !(*a > 0.0) || !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Error::OutOfRange(
                    "dist-orbit needs a > 0 and alpha in (0,1)".into(),
                ));
            }
            let p = orbit.symbols();
            if !sft.is_admissible(p) || !sft.allowed(p[p.len() - 1], p[0]) {
                return Err(Error::Inadmissible(orbit.to_string()));
            }
            if depth < p.len() {
                return Err(Error::OutOfRange(format!(
                    "depth {depth} below orbit period {}",
                    p.len()
                )));
            }
            let fallback = if p.len() == 1 && sft.is_full_shift() {
                Some(TableRepr::OrbitFixed {
                    symbol: p[0],
                    alphabet: sft.alphabet_size(),
                    a: *a,
                    alpha: *alpha,
                    radius,
                })
            } else {
                None
            };
            let dense = build_distance_table(sft, depth, radius, *a, *alpha, truncation_error, |w| {
                orbit_window_value(w, p, *a, *alpha, radius)
            })?;
            match (dense, fallback) {
                (Some(d), _) => Ok(d),
                (None, Some(repr)) => Ok(LocallyConstantPotential {
                    depth,
                    repr,
                    holder_c: *a,
                    holder_alpha: *alpha,
                    truncation_error,
                }),
                (None, None) => Err(Error::TooLarge {
                    what: "dense potential table",
                    size: usize::MAX,
                    budget: TABLE_BUDGET,
                }),
            }
        }
        PotentialSpec::DistSubshift { words } => {
            for w in words {
                if !sft.is_admissible(w.symbols()) {
                    return Err(Error::Inadmissible(w.to_string()));
                }
            }
            let list: Vec<&[u8]> = words.iter().map(|w| w.symbols()).collect();
            match build_distance_table(sft, depth, radius, 1.0, 0.5, truncation_error, |w| {
                subshift_window_value(w, &list, radius)
            })? {
                Some(d) => Ok(d),
                None => Err(Error::TooLarge {
                    what: "dense potential table",
                    size: usize::MAX,
                    budget: TABLE_BUDGET,
                }),
            }
        }
    }
}

fn dense_repr(words: Vec<Word>, values: Vec<f64>) -> TableRepr {
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.symbols().to_vec().into_boxed_slice(), i as u32))
        .collect();
    TableRepr::Dense {
        words,
        index,
        values,
    }
}

fn osc_of(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

/// Dense distance table when the word count fits the budget, None otherwise.
#[allow(clippy::too_many_arguments)]
fn build_distance_table(
    sft: &Sft,
    depth: usize,
    _radius: usize,
    holder_c: f64,
    holder_alpha: f64,
    truncation_error: f64,
    value: impl Fn(&[u8]) -> f64,
) -> Result<Option<LocallyConstantPotential>> {
    let count = sft.word_count(depth);
    if count > num_bigint::BigUint::from(TABLE_BUDGET) {
        return Ok(None);
    }
    let words = sft.enumerate_words(depth)?;
    let values: Vec<f64> = words.iter().map(|w| value(w.symbols())).collect();
    Ok(Some(LocallyConstantPotential {
        depth,
        repr: dense_repr(words, values),
        holder_c,
        holder_alpha,
        truncation_error,
    }))
}

/// Cylinder infimum of -d(x, sunny-side-up) on a window of radius r:
/// -2^(-m) with m the second-smallest |position| of a 1, capped at r+1.
pub(crate) fn sunny_window_value(window: &[u8], radius: usize) -> f64 {
    let r = radius as i64;
    let mut first = i64::MAX;
    let mut second = i64::MAX;
    for (i, &s) in window.iter().enumerate() {
        if s == 1 {
            let d = (i as i64 - r).abs();
            if d < first {
                second = first;
                first = d;
            } else if d < second {
                second = d;
            }
        }
    }
    let m = second.min(r + 1);
    -(2.0f64).powi(-(m as i32))
}

/// -a * d_alpha(x, orbit of p) evaluated on a window of radius r, taking the
/// cylinder infimum (adversarial completion caps agreement at r+1).
pub(crate) fn orbit_window_value(window: &[u8], p: &[u8], a: f64, alpha: f64, radius: usize) -> f64 {
    let k = p.len();
    let r = radius as i64;
    let center = radius;
    let mut best: i64 = 0;
    for j in 0..k {
        // agreement radius with T^j p: smallest |i| <= r with a mismatch
        let mut n = r + 1;
        'scan: for d in 0..=r {
            for pos in [center as i64 - d, center as i64 + d] {
                let coord = pos - center as i64;
                let orbit_sym = p[((coord + j as i64).rem_euclid(k as i64)) as usize];
                if window[pos as usize] != orbit_sym {
                    n = d;
                    break 'scan;
                }
            }
        }
        best = best.max(n);
        if best == r + 1 {
            break;
        }
    }
    -a * alpha.powi(best as i32)
}

/// Fixed-point specialization of [`orbit_window_value`]: m is the smallest
/// |position| of a symbol differing from the fixed symbol, capped at r+1.
pub(crate) fn orbit_fixed_window_value(
    window: &[u8],
    symbol: u8,
    a: f64,
    alpha: f64,
    radius: usize,
) -> f64 {
    let r = radius as i64;
    let mut m = r + 1;
    for (i, &s) in window.iter().enumerate() {
        if s != symbol {
            m = m.min((i as i64 - r).abs());
        }
    }
    -a * alpha.powi(m as i32)
}

/// -d(x, S) where S is approximated by points whose centred windows occur
/// inside the supplied word list: m is the smallest radius whose centred
/// window is missing from every list word, capped at r+1.
pub(crate) fn subshift_window_value(window: &[u8], list: &[&[u8]], radius: usize) -> f64 {
    let r = radius;
    for q in 0..=r {
        let sub = &window[r - q..=r + q];
        let found = list
            .iter()
            .any(|w| w.windows(sub.len()).any(|chunk| chunk == sub));
        if !found {
            return -(2.0f64).powi(-(q as i32));
        }
    }
    -(2.0f64).powi(-(r as i32) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_depth_1_table() {
        let sft = Sft::full_shift(2);
        let pot = LocallyConstantPotential::from_symbol_values(&sft, &[0.0, -1.0]).unwrap();
        assert_eq!(pot.value_of_window(&[0]), 0.0);
        assert_eq!(pot.value_of_window(&[1]), -1.0);
        assert_eq!(pot.truncation_error, 0.0);
    }

    #[test]
    fn sunny_window_111_value() {
        // radius-1 window has >= 2 ones, radius-0 window has one
        assert_eq!(sunny_window_value(&[1, 1, 1], 1), -0.5);
    }

    #[test]
    fn sunny_all_zero_window_within_truncation() {
        let r = 2;
        let v = sunny_window_value(&[0, 0, 0, 0, 0], r);
        let trunc = PotentialSpec::DistSunny.truncation_bound(2 * r + 1);
        assert!(v <= 0.0 && v.abs() <= trunc);
    }

    #[test]
    fn sunny_values_in_unit_interval() {
        let sft = Sft::full_shift(2);
        let pot = build_potential(&sft, &PotentialSpec::DistSunny, 7).unwrap();
        let (_, values) = pot.dense().unwrap();
        assert!(values.iter().all(|&v| (-1.0..=0.0).contains(&v)));
    }

    #[test]
    fn birkhoff_counts_ones_for_coordinate_potential() {
        let sft = Sft::full_shift(2);
        let pot = LocallyConstantPotential::from_symbol_values(&sft, &[0.0, -1.0]).unwrap();
        let w = Word::parse("0110").unwrap();
        assert_eq!(pot.birkhoff_sum(&w).unwrap(), -2.0);
    }

    #[test]
    fn birkhoff_constant_potential() {
        let sft = Sft::full_shift(2);
        let pot = LocallyConstantPotential::from_symbol_values(&sft, &[0.7, 0.7]).unwrap();
        let w = Word::parse("010011").unwrap();
        assert!((pot.birkhoff_sum(&w).unwrap() - 6.0 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn birkhoff_depth_2_hand_value() {
        let sft = Sft::golden_mean();
        let pot =
            LocallyConstantPotential::from_table(&sft, &[("00", 1.0), ("01", 0.0), ("10", 0.0)])
                .unwrap();
        let w = Word::parse("0100").unwrap();
        assert_eq!(pot.birkhoff_sum(&w).unwrap(), 1.0);
    }

    #[test]
    fn birkhoff_rejects_short_words() {
        let sft = Sft::golden_mean();
        let pot =
            LocallyConstantPotential::from_table(&sft, &[("00", 1.0), ("01", 0.0), ("10", 0.0)])
                .unwrap();
        assert!(pot.birkhoff_sum(&Word(vec![0])).is_err());
    }

    #[test]
    fn truncation_bounds() {
        assert_eq!(PotentialSpec::DistSunny.truncation_bound(21), 2.0f64.powi(-10));
        let orbit = PotentialSpec::DistOrbit {
            orbit: Word(vec![0]),
            a: 1.0,
            alpha: 0.5,
        };
        assert_eq!(orbit.truncation_bound(21), 2.0f64.powi(-10));
        let table = PotentialSpec::ExplicitTable {
            table: BTreeMap::new(),
        };
        assert_eq!(table.truncation_bound(9), 0.0);
    }

    #[test]
    fn distance_variants_reject_even_depth() {
        let sft = Sft::full_shift(2);
        assert!(matches!(
            build_potential(&sft, &PotentialSpec::DistSunny, 4),
            Err(Error::DepthParity(4))
        ));
    }

    #[test]
    fn explicit_table_must_cover_admissible_words() {
        let sft = Sft::golden_mean();
        let r = LocallyConstantPotential::from_table(&sft, &[("00", 1.0), ("01", 0.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn explicit_table_rejects_inadmissible_keys() {
        let sft = Sft::golden_mean();
        let r = LocallyConstantPotential::from_table(
            &sft,
            &[("00", 1.0), ("01", 0.0), ("10", 0.0), ("11", 0.0)],
        );
        assert!(matches!(r, Err(Error::Inadmissible(_))));
    }

    #[test]
    fn deeper_truncations_refine() {
        // successive tables agree on refinements within twice the coarser bound
        let sft = Sft::full_shift(2);
        let coarse = build_potential(&sft, &PotentialSpec::DistSunny, 5).unwrap();
        let fine = build_potential(&sft, &PotentialSpec::DistSunny, 9).unwrap();
        assert!(fine.truncation_error <= coarse.truncation_error);
        let (words, fine_vals) = fine.dense().unwrap();
        for (w, &fv) in words.iter().zip(fine_vals) {
            let inner = &w.symbols()[2..7];
            let cv = coarse.value_of_window(inner);
            assert!(
                (fv - cv).abs() <= 2.0 * coarse.truncation_error + 1e-15,
                "window {w}: fine {fv} coarse {cv}"
            );
        }
    }

    #[test]
    fn orbit_fixed_matches_generic_orbit_rule() {
        let sft = Sft::full_shift(2);
        let depth = 7;
        let pot = build_potential(
            &sft,
            &PotentialSpec::DistOrbit {
                orbit: Word(vec![0]),
                a: 1.0,
                alpha: 0.5,
            },
            depth,
        )
        .unwrap();
        let (words, values) = pot.dense().unwrap();
        for (w, &v) in words.iter().zip(values) {
            let direct = orbit_fixed_window_value(w.symbols(), 0, 1.0, 0.5, 3);
            assert_eq!(v, direct);
        }
    }

    #[test]
    fn parse_potential_spec_file() {
        let (spec, depth) = PotentialSpec::parse(
            r#"{"variant": "explicit-table", "depth": 2, "table": {"00": 0.25, "01": 0.0, "10": -0.25}}"#,
        )
        .unwrap();
        assert_eq!(depth, Some(2));
        let sft = Sft::golden_mean();
        let pot = build_potential(&sft, &spec, 2).unwrap();
        assert_eq!(pot.value_of_window(&[0, 0]), 0.25);
    }

    #[test]
    fn subshift_distance_window_values() {
        let list_words = [Word::parse("0000").unwrap()];
        let list: Vec<&[u8]> = list_words.iter().map(|w| w.symbols()).collect();
        // all-zero window sits inside the list words
        assert_eq!(subshift_window_value(&[0, 0, 0], &list, 1), -0.25);
        // centred 1 never occurs: distance 1
        assert_eq!(subshift_window_value(&[0, 1, 0], &list, 1), -1.0);
    }
}
