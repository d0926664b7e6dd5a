//! Per-trajectory collapse dynamics.
//!
//! The equation integrated here adds to the Schrödinger drift a noise
//! term coupled to the mass-density observable `M` plus the nonlinear
//! compensation that keeps the state normalized on average:
//!
//! ```text
//! dpsi = [ -i H dt + sqrt(lambda) (M - <M>) dW - (lambda/2) (M - <M>)^2 dt ] psi
//! ```
//!
//! followed by an explicit renormalization each step (Euler-Maruyama,
//! strong order 1/2). `lambda` multiplies `(M_i - M_j)^2`, so the
//! off-diagonal decay rate of the averaged density matrix is
//! `(lambda/2) (M_i - M_j)^2`; that fixes the factor convention used
//! throughout the crate.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fp;
use crate::matrix::ComplexMatrix;
use crate::noise::{NoiseProcess, NoiseSpectrum};
use crate::state::{DiagonalObservable, StateVector};
use crate::{Error, Result};

/// Hamiltonians must be Hermitian within this per-entry tolerance.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default classification threshold: a trajectory counts as collapsed
/// onto outcome `i` once `p_i >= 1 - epsilon`.
pub const DEFAULT_COLLAPSE_EPSILON: f64 = 1e-3;

/// Conventional noise correlation length, in cm. Carried for reporting;
/// the discrete dynamics never resolves spatial structure below it.
pub const DEFAULT_R_C_CM: f64 = 1e-5;

/// Parameters of the collapse dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CslParams {
    /// Collapse rate, s^-1. Zero switches the noise off.
    pub lambda: f64,
    /// Noise correlation length, cm (informational).
    pub r_c_cm: f64,
    /// Integration step, s (model units in toy runs).
    pub dt: f64,
    pub spectrum: NoiseSpectrum,
}

impl CslParams {
    /// White-noise parameters with the conventional `r_C`.
    pub fn new(lambda: f64, dt: f64) -> Result<Self> {
        let p = Self {
            lambda,
            r_c_cm: DEFAULT_R_C_CM,
            dt,
            spectrum: NoiseSpectrum::White,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_spectrum(mut self, spectrum: NoiseSpectrum) -> Result<Self> {
        self.spectrum = spectrum;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let lambda_ok = self.lambda.is_finite() && self.lambda >= 0.0;
        if !lambda_ok {
            return Err(Error::InvalidInput {
                what: "lambda must be finite and >= 0",
            });
        }
        crate::error::require_positive("dt", self.dt)?;
        if let NoiseSpectrum::Cutoff { omega_max } = self.spectrum {
            crate::error::require_positive("omega_max", omega_max)?;
        }
        Ok(())
    }
}

/// One integrated stochastic trajectory, sampled on a fixed step grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    /// Sample times, strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// Born weights per sample, one row per time.
    pub probabilities: Vec<Vec<f64>>,
    /// `<M>` per sample.
    pub expectation: Vec<f64>,
    /// `Var(M)` per sample; hits zero as the trajectory settles.
    pub variance: Vec<f64>,
    pub final_state: StateVector,
    pub final_time: f64,
    /// Index the trajectory collapsed onto, or `None` if still undecided
    /// at the end of the run.
    pub outcome: Option<usize>,
    pub collapse_time: Option<f64>,
}

/// Prepared integrator state so the per-step loop does no validation or
/// allocation. Also the shared engine behind [`sde_step`] and the
/// ensemble driver.
pub(crate) struct Stepper {
    dim: usize,
    hamiltonian: ComplexMatrix,
    eigenvalues: Vec<f64>,
    lambda: f64,
    dt: f64,
    amps: Vec<Complex64>,
    h_psi: Vec<Complex64>,
    pub(crate) probs: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(
        initial: &StateVector,
        hamiltonian: &ComplexMatrix,
        observable: &DiagonalObservable,
        params: &CslParams,
    ) -> Result<Self> {
        params.validate()?;
        let dim = initial.dim();
        hamiltonian.require_dim(dim)?;
        hamiltonian.require_hermitian(HERMITIAN_TOL)?;
        if observable.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: observable.dim(),
            });
        }
        // Enforce (rather than repair) the unit-norm precondition, so the
        // recorded t = 0 weights are exactly those of the input state.
        let ns = initial.norm_sqr();
        if fp::abs(ns - 1.0) > crate::state::UNIT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: ns });
        }
        let mut stepper = Self {
            dim,
            hamiltonian: hamiltonian.clone(),
            eigenvalues: observable.eigenvalues().to_vec(),
            lambda: params.lambda,
            dt: params.dt,
            amps: initial.amplitudes().to_vec(),
            h_psi: vec![Complex64::new(0.0, 0.0); dim],
            probs: vec![0.0; dim],
        };
        stepper.refresh_probs();
        Ok(stepper)
    }

    fn refresh_probs(&mut self) {
        for (p, c) in self.probs.iter_mut().zip(&self.amps) {
            *p = c.norm_sqr();
        }
    }

    pub(crate) fn expectation(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, m)| p * m)
            .sum()
    }

    pub(crate) fn variance(&self) -> f64 {
        let mean = self.expectation();
        let v: f64 = self
            .probs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, m)| p * (m - mean) * (m - mean))
            .sum();
        v.max(0.0)
    }

    /// One Euler-Maruyama step plus renormalization. Draws channel 0 of
    /// `noise`.
    pub(crate) fn step(&mut self, noise: &mut NoiseProcess) -> Result<()> {
        let dt = self.dt;
        let m_bar = self.expectation();
        let sqrt_lambda = fp::sqrt(self.lambda);
        let dw = if self.lambda > 0.0 {
            noise.increment(0, dt)
        } else {
            0.0
        };
        self.hamiltonian.matvec(&self.amps, &mut self.h_psi);
        let mut moved = false;
        for i in 0..self.dim {
            let delta = self.eigenvalues[i] - m_bar;
            let drift = Complex64::new(0.0, -1.0) * self.h_psi[i] * dt;
            let collapse = (sqrt_lambda * delta * dw - 0.5 * self.lambda * delta * delta * dt)
                * self.amps[i];
            let increment = drift + collapse;
            if increment.norm_sqr() != 0.0 {
                moved = true;
                self.amps[i] += increment;
            }
        }
        // A fixed point (eigenstate with commuting H, or frozen dynamics)
        // stays bit-identical; renormalizing would be a no-op anyway.
        if !moved {
            return Ok(());
        }
        let ns: f64 = self.amps.iter().map(|c| c.norm_sqr()).sum();
        if ns <= crate::state::ZERO_NORM_TOL {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / fp::sqrt(ns);
        for c in &mut self.amps {
            *c *= scale;
        }
        self.refresh_probs();
        Ok(())
    }

    pub(crate) fn state(&self, labels: &[alloc::string::String]) -> StateVector {
        StateVector::new(labels.to_vec(), self.amps.clone())
            .expect("stepper amplitudes stay valid")
    }

    /// Index with `p_i >= 1 - epsilon`, if any.
    pub(crate) fn decided(&self, epsilon: f64) -> Option<usize> {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        (self.probs[best] >= 1.0 - epsilon).then_some(best)
    }
}

/// One step of the collapse stochastic Schrödinger equation.
///
/// With `lambda = 0` this reduces to an Euler step of the Schrödinger
/// equation (renormalized); an eigenstate of `M` with `[H, M] = 0` is a
/// fixed point up to global phase.
pub fn sde_step(
    state: &StateVector,
    hamiltonian: &ComplexMatrix,
    observable: &DiagonalObservable,
    params: &CslParams,
    noise: &mut NoiseProcess,
) -> Result<StateVector> {
    let mut stepper = Stepper::new(state, hamiltonian, observable, params)?;
    stepper.step(noise)?;
    Ok(stepper.state(state.labels()))
}

/// Integrates a trajectory to `t_final`, recording every
/// `sample_every`-th step, and stops early once some Born weight clears
/// `1 - collapse_epsilon`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_trajectory(
    initial: &StateVector,
    hamiltonian: &ComplexMatrix,
    observable: &DiagonalObservable,
    params: &CslParams,
    t_final: f64,
    sample_every: u32,
    collapse_epsilon: f64,
    noise: &mut NoiseProcess,
) -> Result<Trajectory> {
    crate::error::require_positive("t_final", t_final)?;
    if params.dt > t_final {
        return Err(Error::InvalidInput {
            what: "dt must not exceed t_final",
        });
    }
    let epsilon_ok = collapse_epsilon > 0.0 && collapse_epsilon < 0.5;
    if !epsilon_ok {
        return Err(Error::InvalidInput {
            what: "collapse_epsilon must lie in (0, 0.5)",
        });
    }
    if sample_every == 0 {
        return Err(Error::InvalidInput {
            what: "sample_every must be >= 1",
        });
    }
    let mut stepper = Stepper::new(initial, hamiltonian, observable, params)?;
    let n_steps = steps_for(t_final, params.dt);

    let mut traj = Trajectory {
        times: Vec::new(),
        probabilities: Vec::new(),
        expectation: Vec::new(),
        variance: Vec::new(),
        final_state: stepper.state(initial.labels()),
        final_time: 0.0,
        outcome: None,
        collapse_time: None,
    };
    record(&mut traj, 0.0, &stepper);

    let mut last_recorded_step = 0u64;
    for step in 1..=n_steps {
        stepper.step(noise)?;
        let t = step as f64 * params.dt;
        let decided = stepper.decided(collapse_epsilon);
        if step % sample_every as u64 == 0 || decided.is_some() || step == n_steps {
            if step != last_recorded_step {
                record(&mut traj, t, &stepper);
                last_recorded_step = step;
            }
            if let Some(outcome) = decided {
                traj.outcome = Some(outcome);
                traj.collapse_time = Some(t);
                traj.final_time = t;
                traj.final_state = stepper.state(initial.labels());
                return Ok(traj);
            }
        }
    }
    traj.final_time = n_steps as f64 * params.dt;
    traj.final_state = stepper.state(initial.labels());
    Ok(traj)
}

fn record(traj: &mut Trajectory, t: f64, stepper: &Stepper) {
    traj.times.push(t);
    traj.probabilities.push(stepper.probs.clone());
    traj.expectation.push(stepper.expectation());
    traj.variance.push(stepper.variance());
}

pub(crate) fn steps_for(t_final: f64, dt: f64) -> u64 {
    let n = fp::round(t_final / dt);
    if n < 1.0 {
        1
    } else {
        n as u64
    }
}

/// Decay rate `(lambda/2) (M_i - M_j)^2` of the averaged density-matrix
/// entry between basis states `i` and `j`. Symmetric in `i, j` and
/// quadratic in the eigenvalue separation, which is what makes the
/// suppression of superpositions scale with the square of the displaced
/// mass.
pub fn offdiag_decay_rate(
    observable: &DiagonalObservable,
    i: usize,
    j: usize,
    lambda: f64,
) -> Result<f64> {
    let len = observable.dim();
    for index in [i, j] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    if i == j {
        return Err(Error::InvalidInput {
            what: "offdiag_decay_rate needs two distinct indices",
        });
    }
    let delta = observable.eigenvalues()[i] - observable.eigenvalues()[j];
    Ok(0.5 * lambda * delta * delta)
}

/// Characteristic time `1 / (lambda * delta_m_squared)` for a
/// superposition split by an effective squared mass difference
/// `delta_m_squared` to settle.
pub fn collapse_time_estimate(lambda: f64, delta_m_squared: f64) -> Result<f64> {
    crate::error::require_positive("lambda", lambda)?;
    crate::error::require_positive("delta_m_squared", delta_m_squared)?;
    Ok(1.0 / (lambda * delta_m_squared))
}
