//! Argument surface of the `csl` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("probability out of range [0, 1]: {v}"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be finite and >= 0: {v}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be finite and > 0: {v}"))
    }
}

fn epsilon(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 0.5 {
        Ok(v)
    } else {
        Err(format!("collapse threshold must lie in (0, 0.5): {v}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "csl",
    version,
    about = "Collapse-model toolkit: stochastic trajectories, Born-rule ensembles, \
             gambler's-ruin games, and collapse-rate bounds",
    after_help = "Runs are deterministic: the seed defaults to 42 and --threads only \
                  changes speed, never results."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads for ensembles and ruin games (speed only).
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumKind {
    White,
    Cutoff,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one collapse trajectory of the two-level toy model.
    Trajectory(DynamicsArgs),
    /// Run an ensemble of trajectories and tally the outcomes.
    Ensemble(EnsembleArgs),
    /// Exact and simulated fair-coin gambler's ruin.
    Ruin(RuinArgs),
    /// Emit the reference table of upper bounds on the collapse rate.
    Bounds,
    /// Collapse-time estimate 1 / (lambda * dM^2).
    CollapseTime(CollapseTimeArgs),
    /// Noise-induced heating power per particle.
    Heating(HeatingArgs),
}

/// Physics flags shared by `trajectory` and `ensemble`: a two-level
/// system, H = 0, mass-density eigenvalues (0, delta-m), initial Born
/// weight p0 on the second state.
#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Initial Born weight of outcome 1.
    #[arg(long, default_value_t = 0.3, value_parser = probability)]
    pub p0: f64,

    /// Collapse rate lambda (s^-1; model units in toy runs).
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub lambda: f64,

    /// Eigenvalue separation of the mass-density observable.
    #[arg(long, default_value_t = 1.0)]
    pub delta_m: f64,

    /// Run length; default is 20 collapse times, 20 / (lambda dM^2).
    #[arg(long, value_parser = positive)]
    pub t_final: Option<f64>,

    /// Integration step; default keeps lambda dM^2 dt at 1e-2.
    #[arg(long, value_parser = positive)]
    pub dt: Option<f64>,

    /// Record every Nth step.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub sample_every: u32,

    /// Collapse classification threshold.
    #[arg(long, default_value_t = 1e-3, value_parser = epsilon)]
    pub epsilon: f64,

    /// Noise spectrum.
    #[arg(long, value_enum, default_value_t = SpectrumKind::White)]
    pub spectrum: SpectrumKind,

    /// Cutoff frequency; required with --spectrum cutoff.
    #[arg(long, value_parser = positive, required_if_eq("spectrum", "cutoff"))]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    /// Number of trajectories.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct RuinArgs {
    /// Alice's initial pennies.
    #[arg(long, default_value_t = 1)]
    pub a: u64,

    /// Bob's initial pennies.
    #[arg(long, default_value_t = 1)]
    pub b: u64,

    /// Number of simulated games.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct CollapseTimeArgs {
    /// Collapse rate, s^-1.
    #[arg(long, default_value_t = 1e-17, value_parser = positive)]
    pub lambda: f64,

    /// Effective squared mass difference (amplification), counts^2.
    #[arg(long, default_value_t = 1e24, value_parser = positive)]
    pub delta_m_squared: f64,
}

#[derive(Debug, Args)]
pub struct HeatingArgs {
    /// Collapse rate, s^-1.
    #[arg(long, default_value_t = 1e-17, value_parser = positive)]
    pub lambda: f64,

    /// Particle mass, kg.
    #[arg(long, default_value_t = csl_core::bounds::NUCLEON_MASS_KG, value_parser = positive)]
    pub mass_kg: f64,

    /// Noise correlation length, m.
    #[arg(long, default_value_t = 1e-7, value_parser = positive)]
    pub r_c_m: f64,
}
