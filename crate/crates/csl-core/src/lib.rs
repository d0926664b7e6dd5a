//! Collapse-model simulation core.
//!
//! Implements the continuous spontaneous localization (CSL) dynamics for
//! finite-dimensional systems: the nonlinear norm-preserving stochastic
//! Schrödinger equation driven by noise coupled to a mass-density
//! observable, the linear master equation obeyed by the noise-averaged
//! density matrix, ensemble statistics showing that collapse outcome
//! frequencies reproduce the Born rule, the exact gambler's-ruin model
//! behind that mechanism, and the laboratory/cosmological bounds on the
//! collapse rate λ.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable default
//! features and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("csl-core requires either the `std` or the `libm` feature");

extern crate alloc;

mod fp;

pub mod bounds;
pub mod density;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod matrix;
pub mod noise;
pub mod ruin;
pub mod state;

pub use density::{evolve_density, DensityMatrix};
pub use dynamics::{
    collapse_time_estimate, evolve_trajectory, offdiag_decay_rate, sde_step, CslParams, Trajectory,
};
pub use ensemble::{
    aggregate, classify_outcome, martingale_test, run_ensemble, run_member, EnsembleConfig,
    EnsembleMember, EnsembleRun, MartingaleRecord, OutcomeTally,
};
pub use error::Error;
pub use matrix::ComplexMatrix;
pub use noise::{derive_stream_seed, NoiseProcess, NoiseSpectrum};
pub use ruin::{
    expected_length_exact, ruin_probability_exact, ruin_simulate, RuinGame, RuinStats,
};
pub use state::{DiagonalObservable, StateVector};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub use num_complex::Complex64;
