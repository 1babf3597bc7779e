//! Measure-preserving maps, grid partitions, itinerary refinement, and
//! finite-step Kolmogorov-Sinai entropy estimates (deformed and classical).
//!
//! The estimator samples uniform phase-space points, records the itinerary
//! of grid-cell labels along forward iterates, and treats the empirical
//! itinerary frequencies as the measures of the refinement atoms. Forward
//! itineraries give the same entropy sequence as backward refinement for
//! measure-preserving maps, and handle the non-invertible doubling map
//! naturally.
//!
//! The supremum over all initial partitions is not computable; callers fix
//! a partition and should treat the estimate as a lower bound. The grids
//! used throughout the tests (2 cells for doubling/baker, 4 for the cat
//! map and rotations) are the standard generating partitions for which the
//! bound is tight.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::fit_line;
use crate::qmath::{self, EntropicIndex, ProbabilityVector, QmathError};

/// Hard cap on distinct refinement atoms.
pub const MAX_ATOMS: usize = 10_000_000;

/// Largest total cell count accepted for a grid partition.
pub const MAX_CELLS: usize = 256;

/// Deepest refinement step supported by the fixed-radix itinerary keys.
pub const MAX_REFINEMENT_STEPS: usize = 24;

/// Samples drawn per deterministic RNG stream; sharding over streams makes
/// the merged frequency table independent of the worker count.
const SAMPLE_BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PartitionError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("refinement would exceed {MAX_ATOMS} atoms")]
    TooManyAtoms,
    #[error("itinerary key overflow: {cells} cells at {steps} steps does not fit a 128-bit key")]
    KeyOverflow { cells: usize, steps: usize },
    #[error("degenerate fit window: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Qmath(#[from] QmathError),
}

/// A named measure-preserving map of the unit interval/circle (1-D) or the
/// unit square (2-D). All four preserve Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    /// Circle rotation by the angle `(numer/denom) * pi`, acting on `[0, 1)`
    /// as `x -> x + numer/(2 denom) mod 1`.
    Rotation { numer: u32, denom: u32 },
    /// `x -> 2x mod 1` on `[0, 1)`.
    Doubling,
    /// Baker's transformation `(x, y) -> (2x mod 1, (y + floor(2x)) / 2)`.
    Baker,
    /// Arnold's cat map `(x, y) -> (x + y, x + 2y) mod 1`.
    Cat,
}

impl MapSpec {
    /// Rotation by `(numer/denom) * pi`; `numer = 1, denom = 2` is the
    /// quarter turn.
    pub fn rotation(numer: u32, denom: u32) -> Result<Self, PartitionError> {
        if denom == 0 {
            return Err(PartitionError::InvalidParameter {
                name: "denom",
                reason: "rotation denominator must be nonzero".to_string(),
            });
        }
        Ok(MapSpec::Rotation { numer, denom })
    }

    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Rotation { .. } | MapSpec::Doubling => 1,
            MapSpec::Baker | MapSpec::Cat => 2,
        }
    }

    /// One forward iterate. 1-D maps ignore and zero the second coordinate.
    pub fn step(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            MapSpec::Rotation { numer, denom } => {
                let shift = numer as f64 / (2.0 * denom as f64);
                [wrap_unit(p[0] + shift), 0.0]
            }
            MapSpec::Doubling => [wrap_unit(2.0 * p[0]), 0.0],
            MapSpec::Baker => {
                let doubled = 2.0 * p[0];
                if doubled < 1.0 {
                    [doubled, 0.5 * p[1]]
                } else {
                    [doubled - 1.0, 0.5 * (p[1] + 1.0)]
                }
            }
            MapSpec::Cat => [wrap_unit(p[0] + p[1]), wrap_unit(p[0] + 2.0 * p[1])],
        }
    }

    /// `iterations`-fold composition applied to a point.
    pub fn iterate(&self, mut p: [f64; 2], iterations: usize) -> [f64; 2] {
        for _ in 0..iterations {
            p = self.step(p);
        }
        p
    }

    pub fn name(&self) -> String {
        match self {
            MapSpec::Rotation { numer, denom } => format!("rotation:{numer}/{denom}"),
            MapSpec::Doubling => "doubling".to_string(),
            MapSpec::Baker => "baker".to_string(),
            MapSpec::Cat => "cat".to_string(),
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let f = x.fract();
    if f < 0.0 {
        f + 1.0
    } else {
        f
    }
}

/// A uniform grid of `cells_per_axis^dim` congruent cells, each of
/// normalised measure `1/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPartition {
    cells_per_axis: u32,
    dim: usize,
}

impl GridPartition {
    pub fn new(map: &MapSpec, cells_per_axis: u32) -> Result<Self, PartitionError> {
        if cells_per_axis == 0 {
            return Err(PartitionError::InvalidParameter {
                name: "cells_per_axis",
                reason: "must be at least 1".to_string(),
            });
        }
        let dim = map.dim();
        let cells = (cells_per_axis as usize).pow(dim as u32);
        if cells > MAX_CELLS {
            return Err(PartitionError::InvalidParameter {
                name: "cells_per_axis",
                reason: format!("total cell count {cells} exceeds the cap {MAX_CELLS}"),
            });
        }
        Ok(GridPartition {
            cells_per_axis,
            dim,
        })
    }

    pub fn cells_per_axis(&self) -> u32 {
        self.cells_per_axis
    }

    pub fn cell_count(&self) -> usize {
        (self.cells_per_axis as usize).pow(self.dim as u32)
    }

    /// Cell label of a point in `[0,1)^dim`.
    pub fn label(&self, p: [f64; 2]) -> usize {
        let m = self.cells_per_axis as usize;
        let axis = |coord: f64| ((coord * m as f64) as usize).min(m - 1);
        if self.dim == 1 {
            axis(p[0])
        } else {
            axis(p[1]) * m + axis(p[0])
        }
    }
}

/// Empirical refinement atoms: itinerary frequencies of `samples` uniform
/// points followed for `n_max` steps.
///
/// Itineraries are stored as fixed-radix `u128` keys (digit `j` is the cell
/// label at step `j`), so the atoms at step `n` are recovered by truncating
/// keys modulo `m^(n+1)`; every recorded `(n+2)`-itinerary therefore has
/// its `(n+1)`-prefix recorded, which is the refinement property.
#[derive(Debug, Clone)]
pub struct RefinementAtoms {
    map: MapSpec,
    cells: usize,
    n_max: usize,
    samples: u64,
    seed: u64,
    counts: HashMap<u128, u64>,
}

impl RefinementAtoms {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn map(&self) -> &MapSpec {
        self.map_ref()
    }

    fn map_ref(&self) -> &MapSpec {
        &self.map
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// Atoms at refinement step `n`, as `(itinerary key, count)` sorted by
    /// key. Step `n` uses the first `n + 1` labels of every itinerary.
    pub fn counts_at(&self, n: usize) -> Vec<(u128, u64)> {
        assert!(n <= self.n_max, "step {n} beyond n_max {}", self.n_max);
        let modulus = (self.cells as u128).pow(n as u32 + 1);
        let mut folded: HashMap<u128, u64> = HashMap::new();
        for (&key, &count) in &self.counts {
            *folded.entry(key % modulus).or_insert(0) += count;
        }
        let mut table: Vec<(u128, u64)> = folded.into_iter().collect();
        table.sort_unstable_by_key(|&(key, _)| key);
        table
    }

    /// Estimated atom measures at step `n` (sorted by itinerary key).
    pub fn measures_at(&self, n: usize) -> ProbabilityVector {
        let counts: Vec<u64> = self.counts_at(n).into_iter().map(|(_, c)| c).collect();
        ProbabilityVector::from_counts(&counts, self.samples)
            .expect("itinerary counts sum to the sample total")
    }

    pub fn atom_count_at(&self, n: usize) -> usize {
        self.counts_at(n).len()
    }

    /// Empirical measure of each cell at iterate `j`, i.e. of `T^-j A` for
    /// every cell `A`. Measure preservation makes each entry `1/m` up to
    /// Monte-Carlo noise.
    pub fn marginal_at(&self, j: usize) -> Vec<f64> {
        assert!(j <= self.n_max);
        let radix = self.cells as u128;
        let divisor = radix.pow(j as u32);
        let mut freq = vec![0u64; self.cells];
        for (&key, &count) in &self.counts {
            let digit = (key / divisor % radix) as usize;
            freq[digit] += count;
        }
        freq.iter()
            .map(|&c| c as f64 / self.samples as f64)
            .collect()
    }

    /// Decode an itinerary key into its first `len` cell labels.
    pub fn decode_key(&self, key: u128, len: usize) -> Vec<u32> {
        let radix = self.cells as u128;
        let mut digits = Vec::with_capacity(len);
        let mut rest = key;
        for _ in 0..len {
            digits.push((rest % radix) as u32);
            rest /= radix;
        }
        digits
    }
}

/// Draw `samples` uniform points, follow each for `n_max` steps, and tally
/// itinerary frequencies. Identical `(map, partition, n_max, samples, seed)`
/// give bit-identical results regardless of thread count.
pub fn refine(
    map: &MapSpec,
    partition: &GridPartition,
    n_max: usize,
    samples: u64,
    seed: u64,
) -> Result<RefinementAtoms, PartitionError> {
    refine_strided(map, partition, n_max, samples, seed, 1)
}

/// As [`refine`], labelling once every `stride` iterates of the map (the
/// itinerary of the `stride`-fold composition).
fn refine_strided(
    map: &MapSpec,
    partition: &GridPartition,
    n_max: usize,
    samples: u64,
    seed: u64,
    stride: usize,
) -> Result<RefinementAtoms, PartitionError> {
    if samples < 10_000 {
        return Err(PartitionError::InvalidParameter {
            name: "samples",
            reason: format!("need at least 10000, got {samples}"),
        });
    }
    if n_max > MAX_REFINEMENT_STEPS {
        return Err(PartitionError::InvalidParameter {
            name: "n_max",
            reason: format!("exceeds the supported maximum {MAX_REFINEMENT_STEPS}"),
        });
    }
    if stride == 0 {
        return Err(PartitionError::InvalidParameter {
            name: "stride",
            reason: "must be at least 1".to_string(),
        });
    }
    let cells = partition.cell_count();
    // the full-length key m^(n_max+1) must fit a u128
    let mut guard: u128 = 1;
    for _ in 0..=n_max {
        guard = guard
            .checked_mul(cells as u128)
            .ok_or(PartitionError::KeyOverflow {
                cells,
                steps: n_max,
            })?;
    }

    let dim = map.dim();
    let batches = samples.div_ceil(SAMPLE_BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let in_batch = SAMPLE_BATCH.min(samples - batch * SAMPLE_BATCH);
            let mut local: HashMap<u128, u64> = HashMap::new();
            for _ in 0..in_batch {
                let mut p = [rng.gen::<f64>(), 0.0];
                if dim == 2 {
                    p[1] = rng.gen::<f64>();
                }
                let mut key: u128 = 0;
                let mut radix_power: u128 = 1;
                for step in 0..=n_max {
                    key += partition.label(p) as u128 * radix_power;
                    radix_power *= cells as u128;
                    if step < n_max {
                        p = map.iterate(p, stride);
                    }
                }
                *local.entry(key).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut acc, local| {
            for (key, count) in local {
                *acc.entry(key).or_insert(0) += count;
            }
            acc
        });

    if counts.len() > MAX_ATOMS {
        return Err(PartitionError::TooManyAtoms);
    }
    Ok(RefinementAtoms {
        map: *map,
        cells,
        n_max,
        samples,
        seed,
        counts,
    })
}

/// Entropy of a partition from its atom measures: `H_q = sum mu ln_q(1/mu)`.
/// At `q = 1` this is the Shannon entropy of the partition.
pub fn partition_entropy(
    measures: &ProbabilityVector,
    q: EntropicIndex,
) -> Result<f64, PartitionError> {
    Ok(qmath::tsallis_entropy(measures, q)?)
}

/// A finite-step estimate of the (deformed) KS entropy: the per-step
/// entropies `H_q(n)` and the least-squares slope over the fit window.
#[derive(Debug, Clone)]
pub struct KsEstimate {
    pub q: f64,
    /// `H_q(n)` for `n = 0..=n_max`, in nats.
    pub entropies: Vec<f64>,
    pub atom_counts: Vec<usize>,
    /// Entropy production per time step (nats/step) over the fit window.
    pub slope: f64,
    pub slope_stderr: f64,
    pub fit_window: (usize, usize),
}

/// Default tail window `[n_max/2, n_max]`: `H(n)` is affine in `n` for
/// Markov partitions, so the tail slope is exact up to sampling noise.
pub fn default_fit_window(n_max: usize) -> (usize, usize) {
    (n_max / 2, n_max)
}

/// Estimate `h_KS^(q)` for a map: refine, evaluate `H_q(n)`, fit the slope.
#[allow(clippy::too_many_arguments)]
pub fn ks_entropy_estimate(
    map: &MapSpec,
    partition: &GridPartition,
    q: EntropicIndex,
    n_max: usize,
    samples: u64,
    seed: u64,
    fit_window: (usize, usize),
) -> Result<KsEstimate, PartitionError> {
    let atoms = refine(map, partition, n_max, samples, seed)?;
    estimate_from_atoms(&atoms, q, fit_window, 1)
}

fn estimate_from_atoms(
    atoms: &RefinementAtoms,
    q: EntropicIndex,
    fit_window: (usize, usize),
    block: usize,
) -> Result<KsEstimate, PartitionError> {
    // with block > 1, point k of the sequence is H_q at base step (k+1)*block - 1,
    // i.e. the entropy of the block map's refinement at step k
    let steps = (atoms.n_max() + 1) / block;
    let (lo, hi) = fit_window;
    if lo > hi || hi >= steps || hi - lo + 1 < 3 {
        return Err(PartitionError::DegenerateFit(format!(
            "window [{lo}, {hi}] must hold at least 3 points within 0..={}",
            steps.saturating_sub(1)
        )));
    }
    let mut entropies = Vec::with_capacity(steps);
    let mut atom_counts = Vec::with_capacity(steps);
    for k in 0..steps {
        let base_step = (k + 1) * block - 1;
        let measures = atoms.measures_at(base_step);
        atom_counts.push(measures.len());
        entropies.push(partition_entropy(&measures, q)?);
    }
    let xs: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let ys: Vec<f64> = entropies[lo..=hi].to_vec();
    let distinct = xs.len();
    if distinct < 3 {
        return Err(PartitionError::DegenerateFit(
            "fewer than 3 distinct steps in the window".to_string(),
        ));
    }
    let fit = fit_line(&xs, &ys);
    Ok(KsEstimate {
        q: q.value(),
        entropies,
        atom_counts,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        fit_window,
    })
}

/// The two sides of the time-rescaling identity `h(T) = h(T_kappa)/kappa`.
#[derive(Debug, Clone)]
pub struct RescaledEntropies {
    /// `h_KS^(q)(T)` per step, with its fit standard error.
    pub per_step: f64,
    pub per_step_stderr: f64,
    /// `h_KS^(q)(T_kappa) / kappa`, with its (already rescaled) fit error.
    pub rescaled: f64,
    pub rescaled_stderr: f64,
}

/// Check the rescaling identity by estimating the entropy of `T` and of the
/// `kappa`-fold composition `T_kappa` from one itinerary sample.
///
/// The `T_kappa` estimate uses the block partition (the common refinement of
/// the base partition over one block of `kappa` iterates) as its initial
/// partition; this is the canonical choice under which the rescaling law
/// holds with a fixed generating partition. With `kappa = 1` both sides are
/// identical by construction.
pub fn rescaled_entropy_check(
    map: &MapSpec,
    kappa: usize,
    partition: &GridPartition,
    q: EntropicIndex,
    n_max: usize,
    samples: u64,
    seed: u64,
) -> Result<RescaledEntropies, PartitionError> {
    if kappa == 0 {
        return Err(PartitionError::InvalidParameter {
            name: "kappa",
            reason: "must be at least 1".to_string(),
        });
    }
    let block_steps = (n_max + 1) / kappa;
    if block_steps < 5 {
        return Err(PartitionError::InvalidParameter {
            name: "n_max",
            reason: format!(
                "(n_max+1)/kappa = {block_steps} block steps cannot hold a 3-point tail window"
            ),
        });
    }
    let atoms = refine(map, partition, n_max, samples, seed)?;
    let base = estimate_from_atoms(&atoms, q, default_fit_window(n_max), 1)?;
    let block = estimate_from_atoms(&atoms, q, default_fit_window(block_steps - 1), kappa)?;
    Ok(RescaledEntropies {
        per_step: base.slope,
        per_step_stderr: base.slope_stderr,
        rescaled: block.slope / kappa as f64,
        rescaled_stderr: block.slope_stderr / kappa as f64,
    })
}
