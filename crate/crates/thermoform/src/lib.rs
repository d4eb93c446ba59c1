//! Numerical laboratory for the thermodynamic formalism of locally
//! constant potentials on mixing subshifts of finite type: pressure
//! functions and their certified enclosures, equilibrium Markov states,
//! slant asymptotes and gap functions, coupling-splicing measure
//! constructions, and the Rothstein / beta-shift combinatorics backing
//! the slow-convergence experiments.

pub mod constructions;
pub mod error;
pub mod ergopt;
pub mod graph;
pub mod potential;
pub mod pressure;
pub mod sft;
pub mod splice;

pub use error::{Error, Result};
pub use ergopt::{
    convexity_gap, fit_decay, gap_infinity, heavy_light_words, max_cycle_mean, maxplus_normalize,
    tangent_gap, AsymptoteData, DecayFit, Verdict,
};
pub use potential::{build_potential, LocallyConstantPotential, PotentialSpec};
pub use pressure::{
    block_entropy, entropy_and_integral, equilibrium_state, gibbs_report, pressure, GibbsReport,
    MarkovMeasure, PressureValue,
};
pub use sft::{PeriodicOrbit, Sft, Word};
pub use splice::{
    connector_words, empirical_block_entropy, nu_closed_form, sample_nu, splice_experiment,
    splice_map, GapMeasureParams, SpliceConfig, SpliceReport,
};
