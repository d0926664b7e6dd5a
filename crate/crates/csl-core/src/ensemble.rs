//! Ensemble statistics of the collapse dynamics: outcome tallies against
//! the Born weights and the martingale check behind them.
//!
//! Each trajectory gets its own noise stream derived from
//! `(master_seed, index)`, so members can be computed in any order — or
//! in parallel — and aggregated into identical results.

use alloc::vec::Vec;

use crate::dynamics::{steps_for, CslParams, Stepper};
use crate::matrix::ComplexMatrix;
use crate::noise::{derive_stream_seed, NoiseProcess};
use crate::state::{DiagonalObservable, StateVector};
use crate::{Error, Result};

/// Everything needed to reproduce an ensemble run.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub n_trajectories: u64,
    pub master_seed: u64,
    pub collapse_epsilon: f64,
    pub t_final: f64,
    /// Martingale record cadence, in integration steps.
    pub sample_every: u32,
    pub params: CslParams,
    pub hamiltonian: ComplexMatrix,
    pub observable: DiagonalObservable,
    pub initial: StateVector,
}

impl EnsembleConfig {
    /// The standard two-level setup: `H = 0`, `M = (0, delta_m)`, initial
    /// Born weight `p1` on the second state.
    pub fn two_level(
        p1: f64,
        delta_m: f64,
        params: CslParams,
        t_final: f64,
        n_trajectories: u64,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            n_trajectories,
            master_seed,
            collapse_epsilon: crate::dynamics::DEFAULT_COLLAPSE_EPSILON,
            t_final,
            sample_every: 50,
            params,
            hamiltonian: ComplexMatrix::zeros(2),
            observable: DiagonalObservable::two_level(delta_m),
            initial: StateVector::two_level(p1)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::InvalidInput {
                what: "ensemble needs at least one trajectory",
            });
        }
        let epsilon_ok = self.collapse_epsilon > 0.0 && self.collapse_epsilon < 0.5;
        if !epsilon_ok {
            return Err(Error::InvalidInput {
                what: "collapse_epsilon must lie in (0, 0.5)",
            });
        }
        crate::error::require_positive("t_final", self.t_final)?;
        if self.params.dt > self.t_final {
            return Err(Error::InvalidInput {
                what: "dt must not exceed t_final",
            });
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidInput {
                what: "sample_every must be >= 1",
            });
        }
        self.params.validate()?;
        Ok(())
    }

    /// Shared sample-time grid of the martingale record: `t = 0` plus
    /// every `sample_every`-th step.
    pub fn sample_times(&self) -> Vec<f64> {
        let n_steps = steps_for(self.t_final, self.params.dt);
        let mut times = alloc::vec![0.0];
        let mut step = self.sample_every as u64;
        while step <= n_steps {
            times.push(step as f64 * self.params.dt);
            step += self.sample_every as u64;
        }
        times
    }
}

/// Per-trajectory result reduced to what the ensemble statistics need.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub index: u64,
    pub outcome: Option<usize>,
    pub collapse_time: Option<f64>,
    /// Born weights on the shared sample grid, row-major
    /// `(time, outcome)`. After collapse the stopped values are carried
    /// forward, which keeps the record an exact stopped martingale.
    pub probabilities: Vec<f64>,
}

/// Ensemble outcome counts. `counts[i] + ... + undecided = total`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutcomeTally {
    pub counts: Vec<u64>,
    pub undecided: u64,
}

impl OutcomeTally {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.undecided
    }

    pub fn decided(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Frequency of outcome `i` among decided trajectories.
    pub fn decided_frequency(&self, i: usize) -> f64 {
        let decided = self.decided();
        if decided == 0 {
            return 0.0;
        }
        self.counts[i] as f64 / decided as f64
    }

    pub fn undecided_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.undecided as f64 / total as f64
    }
}

/// Ensemble mean and standard error of each Born weight at each sample
/// time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MartingaleRecord {
    pub times: Vec<f64>,
    /// `mean[t][i]`: ensemble mean of `p_i` at `times[t]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error of that mean (sample std / sqrt(n)).
    pub std_err: Vec<Vec<f64>>,
    pub n_trajectories: u64,
}

/// Aggregated output of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleRun {
    pub tally: OutcomeTally,
    pub record: MartingaleRecord,
    /// Median time at which decided trajectories collapsed.
    pub median_collapse_time: Option<f64>,
}

/// Runs trajectory `index` of the ensemble. Pure function of
/// `(config, index)`; safe to fan out across threads.
pub fn run_member(config: &EnsembleConfig, index: u64) -> Result<EnsembleMember> {
    config.validate()?;
    let mut noise = NoiseProcess::new(
        derive_stream_seed(config.master_seed, index),
        1,
        config.params.spectrum,
    )?;
    let mut stepper = Stepper::new(
        &config.initial,
        &config.hamiltonian,
        &config.observable,
        &config.params,
    )?;
    let dim = config.initial.dim();
    let n_steps = steps_for(config.t_final, config.params.dt);
    let sample_every = config.sample_every as u64;
    let n_times = 1 + (n_steps / sample_every) as usize;

    let mut probabilities = Vec::with_capacity(n_times * dim);
    probabilities.extend_from_slice(&stepper.probs);

    let mut outcome = None;
    let mut collapse_time = None;
    for step in 1..=n_steps {
        stepper.step(&mut noise)?;
        if let Some(decided) = stepper.decided(config.collapse_epsilon) {
            outcome = Some(decided);
            collapse_time = Some(step as f64 * config.params.dt);
        }
        if step % sample_every == 0 {
            probabilities.extend_from_slice(&stepper.probs);
        }
        if outcome.is_some() {
            break;
        }
    }
    // The values at the stopping time fill the rest of the grid.
    while probabilities.len() < n_times * dim {
        probabilities.extend_from_slice(&stepper.probs);
    }

    Ok(EnsembleMember {
        index,
        outcome,
        collapse_time,
        probabilities,
    })
}

/// Deterministic reduction of members (in index order) into the tally and
/// martingale record.
pub fn aggregate(config: &EnsembleConfig, members: &[EnsembleMember]) -> Result<EnsembleRun> {
    let dim = config.initial.dim();
    let times = config.sample_times();
    let n_times = times.len();
    if members.is_empty() {
        return Err(Error::EmptyRecord);
    }

    let mut counts = alloc::vec![0u64; dim];
    let mut undecided = 0u64;
    let mut sum = alloc::vec![0.0f64; n_times * dim];
    let mut sumsq = alloc::vec![0.0f64; n_times * dim];
    let mut collapse_times: Vec<f64> = Vec::new();

    for member in members {
        if member.probabilities.len() != n_times * dim {
            return Err(Error::DimensionMismatch {
                expected: n_times * dim,
                found: member.probabilities.len(),
            });
        }
        match member.outcome {
            Some(i) => counts[i] += 1,
            None => undecided += 1,
        }
        if let Some(t) = member.collapse_time {
            collapse_times.push(t);
        }
        for (k, p) in member.probabilities.iter().enumerate() {
            sum[k] += p;
            sumsq[k] += p * p;
        }
    }

    let n = members.len() as f64;
    let mut mean = Vec::with_capacity(n_times);
    let mut std_err = Vec::with_capacity(n_times);
    for t in 0..n_times {
        let mut mean_row = Vec::with_capacity(dim);
        let mut se_row = Vec::with_capacity(dim);
        for i in 0..dim {
            let k = t * dim + i;
            let m = sum[k] / n;
            let var = if members.len() > 1 {
                ((sumsq[k] - sum[k] * sum[k] / n) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            mean_row.push(m);
            se_row.push(crate::fp::sqrt(var / n));
        }
        mean.push(mean_row);
        std_err.push(se_row);
    }

    collapse_times.sort_unstable_by(f64::total_cmp);
    let median_collapse_time = if collapse_times.is_empty() {
        None
    } else {
        let mid = collapse_times.len() / 2;
        Some(if collapse_times.len() % 2 == 1 {
            collapse_times[mid]
        } else {
            0.5 * (collapse_times[mid - 1] + collapse_times[mid])
        })
    };

    Ok(EnsembleRun {
        tally: OutcomeTally { counts, undecided },
        record: MartingaleRecord {
            times,
            mean,
            std_err,
            n_trajectories: members.len() as u64,
        },
        median_collapse_time,
    })
}

/// Runs the whole ensemble sequentially. Identical output to aggregating
/// `run_member` results computed in any order.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleRun> {
    config.validate()?;
    let members: Result<Vec<EnsembleMember>> = (0..config.n_trajectories)
        .map(|i| run_member(config, i))
        .collect();
    aggregate(config, &members?)
}

/// Outcome index `i` if `p_i >= 1 - epsilon`, otherwise `None`
/// (undecided). The inequality is as written: a weight exactly at the
/// threshold counts as decided, anything below does not.
pub fn classify_outcome(state: &StateVector, epsilon: f64) -> Result<Option<usize>> {
    let epsilon_ok = epsilon > 0.0 && epsilon < 0.5;
    if !epsilon_ok {
        return Err(Error::InvalidInput {
            what: "epsilon must lie in (0, 0.5)",
        });
    }
    let probs = state.probabilities()?;
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    Ok((probs[best] >= 1.0 - epsilon).then_some(best))
}

/// Deviations of an ensemble mean below this are rounding noise from the
/// reduction itself (probabilities are O(1), ensembles are < 1e9 members),
/// nine orders below any reachable standard error.
const MEAN_ROUNDING_DEADBAND: f64 = 1e-13;

/// Largest deviation of the recorded ensemble means from the initial Born
/// weights, in units of their standard error. The collapse dynamics is a
/// martingale in each `p_i`, so the statistic stays below ~3 for healthy
/// runs; frozen dynamics scores exactly zero.
pub fn martingale_test(record: &MartingaleRecord, p0: &[f64]) -> Result<f64> {
    if record.times.is_empty() || record.n_trajectories == 0 {
        return Err(Error::EmptyRecord);
    }
    let mut max_z = 0.0f64;
    for (mean_row, se_row) in record.mean.iter().zip(&record.std_err) {
        if mean_row.len() != p0.len() {
            return Err(Error::DimensionMismatch {
                expected: p0.len(),
                found: mean_row.len(),
            });
        }
        for ((m, se), p) in mean_row.iter().zip(se_row).zip(p0) {
            let dev = crate::fp::abs(m - p);
            let z = if dev <= MEAN_ROUNDING_DEADBAND {
                0.0
            } else if *se == 0.0 {
                f64::INFINITY
            } else {
                dev / se
            };
            if z > max_z {
                max_z = z;
            }
        }
    }
    Ok(max_z)
}
