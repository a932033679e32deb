//! Batch drivers: hierarchy censuses over sampled channel pairs and
//! parameter sweeps along channel families.
//!
//! Both drivers evaluate the four reported strategy classes
//! ([`Strategy::HIERARCHY`]) on a sequence of two-channel ensembles and
//! return the float optimal values in a fixed row order, so downstream
//! consumers (CSV writers, tests) see deterministic output. Within the
//! sequential class only the `1 → 2` order is solved: with two copies of
//! one unknown channel in both hypotheses, relabeling the copies maps
//! either order onto the other without changing the value.
//!
//! Rows are computed in parallel with rayon but collected in index order,
//! and each census row draws from its own counter-mode RNG stream, so the
//! output depends only on `(samples, seed)` — not on thread scheduling.

use rayon::prelude::*;

use crate::channels::{Channel, Ensemble, rational_to_f64};
use crate::exact::{Rational, rational_to_string};
use crate::sdp::{SdpError, SolverConfig, discriminate};
use crate::strategies::Strategy;

/// Float optimal values of one ensemble under the four reported classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HierarchyValues {
    pub par: f64,
    pub seq: f64,
    pub sep: f64,
    pub general: f64,
}

impl HierarchyValues {
    /// Values in hierarchy order: parallel, sequential, separable, general.
    pub fn as_array(&self) -> [f64; 4] {
        [self.par, self.seq, self.sep, self.general]
    }

    /// Consecutive differences `[seq − par, sep − seq, gen − sep]`.
    pub fn gaps(&self) -> [f64; 3] {
        [
            self.seq - self.par,
            self.sep - self.seq,
            self.general - self.sep,
        ]
    }
}

/// Solves the discrimination SDP for each class in [`Strategy::HIERARCHY`].
pub fn hierarchy_values(
    ensemble: &Ensemble,
    config: &SolverConfig,
) -> Result<HierarchyValues, SdpError> {
    let mut v = [0.0; 4];
    for (slot, strategy) in v.iter_mut().zip(Strategy::HIERARCHY) {
        *slot = discriminate(ensemble, strategy, config)?.value;
    }
    Ok(HierarchyValues {
        par: v[0],
        seq: v[1],
        sep: v[2],
        general: v[3],
    })
}

/// One census sample: the pair index (RNG stream) and its four values.
#[derive(Clone, Copy, Debug)]
pub struct CensusRow {
    pub pair: u64,
    pub values: HierarchyValues,
}

/// Counts of strict separations over a census, at a fixed threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusSummary {
    pub samples: usize,
    pub par_lt_seq: usize,
    pub seq_lt_sep: usize,
    pub sep_lt_gen: usize,
    /// Rows where all three consecutive gaps clear the threshold.
    pub full_hierarchy: usize,
}

/// Evaluates `samples` uniformly sampled channel pairs (two copies, equal
/// priors) under all four classes. Row `i` uses RNG stream `i` of `seed`,
/// so any row can be regenerated in isolation and the full table is
/// reproducible regardless of how the work is scheduled.
pub fn hierarchy_census(
    samples: u64,
    seed: u64,
    config: &SolverConfig,
) -> Result<Vec<CensusRow>, SdpError> {
    (0..samples)
        .into_par_iter()
        .map(|pair| {
            let (a, b) = Channel::random_pair(seed, pair)?;
            let ensemble = Ensemble::uniform_pair(a, b)?;
            let values = hierarchy_values(&ensemble, config)?;
            log::info!(
                "census pair {pair}: par={:.9} seq={:.9} sep={:.9} gen={:.9}",
                values.par,
                values.seq,
                values.sep,
                values.general
            );
            Ok(CensusRow { pair, values })
        })
        .collect()
}

/// Tallies how many rows separate each consecutive pair of classes by more
/// than `threshold`, and how many separate all three at once.
pub fn summarize(rows: &[CensusRow], threshold: f64) -> CensusSummary {
    let mut summary = CensusSummary {
        samples: rows.len(),
        par_lt_seq: 0,
        seq_lt_sep: 0,
        sep_lt_gen: 0,
        full_hierarchy: 0,
    };
    for row in rows {
        let gaps = row.values.gaps();
        let strict = gaps.map(|g| g > threshold);
        summary.par_lt_seq += strict[0] as usize;
        summary.seq_lt_sep += strict[1] as usize;
        summary.sep_lt_gen += strict[2] as usize;
        summary.full_hierarchy += strict.iter().all(|&s| s) as usize;
    }
    summary
}

/// One sweep sample: the amplitude-damping parameter and its four values.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub gamma: Rational,
    pub values: HierarchyValues,
}

/// Sweeps the ensemble `{(1/2, AD(γ)), (1/2, BF(η))}` (two copies) over a
/// grid of damping parameters, holding the bit-flip parameter fixed.
/// Rows come back in grid order.
pub fn gamma_sweep(
    grid: &[Rational],
    eta: &Rational,
    config: &SolverConfig,
) -> Result<Vec<SweepRow>, SdpError> {
    grid.par_iter()
        .map(|gamma| {
            let ad = Channel::amplitude_damping(gamma)?;
            let bf = Channel::bit_flip(eta)?;
            let ensemble = Ensemble::uniform_pair(ad, bf)?;
            let values = hierarchy_values(&ensemble, config)?;
            log::info!(
                "sweep gamma={}: par={:.9} seq={:.9} sep={:.9} gen={:.9}",
                rational_to_string(gamma),
                values.par,
                values.seq,
                values.sep,
                values.general
            );
            Ok(SweepRow {
                gamma: gamma.clone(),
                values,
            })
        })
        .collect()
}

/// Convenience: the float value of a rational grid point, for CSV output.
pub fn grid_point_to_f64(gamma: &Rational) -> f64 {
    rational_to_f64(gamma)
}
