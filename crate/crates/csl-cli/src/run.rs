//! Resolved run configurations, result records, and command execution.

use std::fs;
use std::io::Write;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use csl_core::bounds::{
    bounds_table, cosmology_consistency, enhanced_lambda, heating_rate_per_particle, BoundKind,
    CosmologyFlag, CONVENTIONAL_LAMBDA,
};
use csl_core::{
    aggregate, collapse_time_estimate, derive_stream_seed, evolve_trajectory, martingale_test,
    ruin_probability_exact, ruin_simulate, expected_length_exact, run_member, CslParams,
    DiagonalObservable, EnsembleConfig, MartingaleRecord, NoiseProcess, NoiseSpectrum,
    OutcomeTally, RuinGame, RuinStats, StateVector, Trajectory,
};

use crate::cli::{Cli, Command, DynamicsArgs, Format, SpectrumKind};
use crate::output;

pub const SCHEMA_VERSION: u32 = 1;

/// The fully resolved configuration embedded in every output. Excludes
/// presentation details (output path, format) and `--threads`, which by
/// contract never changes results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Trajectory(DynamicsConfig),
    Ensemble(EnsembleRunConfig),
    Ruin(RuinConfig),
    Bounds(BoundsConfig),
    CollapseTime(CollapseTimeConfig),
    Heating(HeatingConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub seed: u64,
    pub p0: f64,
    pub lambda: f64,
    pub delta_m: f64,
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: u32,
    pub epsilon: f64,
    pub spectrum: NoiseSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRunConfig {
    #[serde(flatten)]
    pub dynamics: DynamicsConfig,
    pub n_trajectories: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinConfig {
    pub seed: u64,
    pub a: u64,
    pub b: u64,
    pub n_games: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseTimeConfig {
    pub seed: u64,
    pub lambda: f64,
    pub delta_m_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingConfig {
    pub seed: u64,
    pub lambda: f64,
    pub mass_kg: f64,
    pub r_c_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<R> {
    pub schema_version: u32,
    pub config: RunConfig,
    pub results: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResults {
    #[serde(flatten)]
    pub summary: EnsembleSummary,
    pub record: MartingaleRecord,
}

/// Everything about an ensemble except the (long) time record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub tally: OutcomeTally,
    pub decided_frequencies: Vec<f64>,
    pub undecided_fraction: f64,
    pub martingale_max_z: f64,
    pub median_collapse_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinResults {
    pub exact_win_probability: f64,
    pub exact_mean_length: f64,
    pub simulation: RuinStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub kind: BoundKind,
    pub orders_above_conventional: i32,
    pub lambda_max: f64,
    pub orders_above_enhanced: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResults {
    pub conventional_lambda: f64,
    pub enhanced_lambda: f64,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseTimeResults {
    pub estimate_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingResults {
    pub heating_rate_w: f64,
    pub cosmology_ratio: f64,
    pub cosmology_compatible: bool,
}

fn resolve_dynamics(args: &DynamicsArgs, seed: u64) -> DynamicsConfig {
    let spectrum = match args.spectrum {
        SpectrumKind::White => NoiseSpectrum::White,
        SpectrumKind::Cutoff => NoiseSpectrum::Cutoff {
            // clap enforces presence for the cutoff spectrum.
            omega_max: args.omega_max.unwrap_or(f64::NAN),
        },
    };
    let strength = args.lambda * args.delta_m * args.delta_m;
    let t_final = args.t_final.unwrap_or(if strength > 0.0 {
        20.0 / strength
    } else {
        20.0
    });
    let dt = args.dt.unwrap_or_else(|| {
        let resolves_run = t_final / 100.0;
        if strength > 0.0 {
            (1e-2 / strength).min(resolves_run)
        } else {
            resolves_run
        }
    });
    DynamicsConfig {
        seed,
        p0: args.p0,
        lambda: args.lambda,
        delta_m: args.delta_m,
        t_final,
        dt,
        sample_every: args.sample_every,
        epsilon: args.epsilon,
        spectrum,
    }
}

fn core_params(config: &DynamicsConfig) -> anyhow::Result<CslParams> {
    Ok(CslParams::new(config.lambda, config.dt)?.with_spectrum(config.spectrum)?)
}

fn ensemble_config(config: &DynamicsConfig, n: u64) -> anyhow::Result<EnsembleConfig> {
    let params = core_params(config)?;
    let mut cfg = EnsembleConfig::two_level(
        config.p0,
        config.delta_m,
        params,
        config.t_final,
        n,
        config.seed,
    )?;
    cfg.collapse_epsilon = config.epsilon;
    cfg.sample_every = config.sample_every;
    cfg.validate()?;
    Ok(cfg)
}

fn run_trajectory(config: &DynamicsConfig) -> anyhow::Result<Trajectory> {
    let params = core_params(config)?;
    let initial = StateVector::two_level(config.p0)?;
    let observable = DiagonalObservable::two_level(config.delta_m);
    let hamiltonian = csl_core::ComplexMatrix::zeros(2);
    // Same stream as member 0 of an ensemble with this seed.
    let mut noise = NoiseProcess::new(
        derive_stream_seed(config.seed, 0),
        1,
        config.spectrum,
    )?;
    Ok(evolve_trajectory(
        &initial,
        &hamiltonian,
        &observable,
        &params,
        config.t_final,
        config.sample_every,
        config.epsilon,
        &mut noise,
    )?)
}

fn run_ensemble_parallel(
    config: &DynamicsConfig,
    n: u64,
    threads: u32,
) -> anyhow::Result<EnsembleResults> {
    let cfg = ensemble_config(config, n)?;
    let run = if threads <= 1 {
        csl_core::run_ensemble(&cfg)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build()
            .context("building thread pool")?;
        let members = pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| run_member(&cfg, i))
                .collect::<Result<Vec<_>, _>>()
        })?;
        // Indexed collect keeps member order; the reduction is identical
        // to the sequential one.
        aggregate(&cfg, &members)?
    };
    let p0 = cfg.initial.probabilities()?;
    let martingale_max_z = martingale_test(&run.record, &p0)?;
    let decided_frequencies = (0..cfg.initial.dim())
        .map(|i| run.tally.decided_frequency(i))
        .collect();
    Ok(EnsembleResults {
        summary: EnsembleSummary {
            undecided_fraction: run.tally.undecided_fraction(),
            decided_frequencies,
            martingale_max_z,
            median_collapse_time: run.median_collapse_time,
            tally: run.tally,
        },
        record: run.record,
    })
}

fn run_ruin(config: &RuinConfig, threads: u32) -> anyhow::Result<RuinResults> {
    let game = RuinGame::new(config.a, config.b)?;
    let simulation = if threads <= 1 {
        ruin_simulate(&game, config.n_games, config.seed)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build()
            .context("building thread pool")?;
        let (wins, flips) = pool.install(|| {
            (0..config.n_games)
                .into_par_iter()
                .map(|i| csl_core::ruin::play_game(&game, config.seed, i))
                .map(|(won, flips)| (won as u64, flips))
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
        });
        csl_core::ruin::tally_games(config.n_games, wins, flips)
    };
    Ok(RuinResults {
        exact_win_probability: ruin_probability_exact(&game)?,
        exact_mean_length: expected_length_exact(&game)?,
        simulation,
    })
}

fn run_bounds() -> BoundsResults {
    let enhanced = enhanced_lambda(CONVENTIONAL_LAMBDA).expect("constant is positive");
    let rows = bounds_table()
        .into_iter()
        .map(|b| BoundRow {
            orders_above_enhanced: b.orders_above_enhanced(),
            name: b.name,
            kind: b.kind,
            orders_above_conventional: b.orders_above_conventional,
            lambda_max: b.lambda_max,
        })
        .collect();
    BoundsResults {
        conventional_lambda: CONVENTIONAL_LAMBDA,
        enhanced_lambda: enhanced,
        rows,
    }
}

/// Cross-field validation on the resolved configuration; failures are
/// usage errors, not runtime errors.
pub fn usage_check(cli: &Cli) -> Result<(), String> {
    let dynamics = match &cli.command {
        Command::Trajectory(args) => Some(args),
        Command::Ensemble(args) => Some(&args.dynamics),
        _ => None,
    };
    if let Some(args) = dynamics {
        let config = resolve_dynamics(args, cli.seed);
        if config.dt > config.t_final {
            return Err(format!(
                "--dt ({}) must not exceed the run length --t-final ({})",
                config.dt, config.t_final
            ));
        }
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    let rendered = render(cli)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout()
            .write_all(rendered.as_bytes())
            .context("writing stdout")?,
    }
    Ok(())
}

/// Computes the command and renders its output in the requested format.
pub fn render(cli: &Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::Trajectory(args) => {
            let config = resolve_dynamics(args, cli.seed);
            let results = run_trajectory(&config)?;
            let config = RunConfig::Trajectory(config);
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::trajectory_csv(&config, &results)?,
            })
        }
        Command::Ensemble(args) => {
            let dynamics = resolve_dynamics(&args.dynamics, cli.seed);
            let results = run_ensemble_parallel(&dynamics, args.n, cli.threads)?;
            let config = RunConfig::Ensemble(EnsembleRunConfig {
                dynamics,
                n_trajectories: args.n,
            });
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::ensemble_csv(&config, &results)?,
            })
        }
        Command::Ruin(args) => {
            let rc = RuinConfig {
                seed: cli.seed,
                a: args.a,
                b: args.b,
                n_games: args.n,
            };
            let results = run_ruin(&rc, cli.threads)?;
            let config = RunConfig::Ruin(rc);
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::ruin_csv(&config, &results)?,
            })
        }
        Command::Bounds => {
            let config = RunConfig::Bounds(BoundsConfig { seed: cli.seed });
            let results = run_bounds();
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::bounds_csv(&config, &results)?,
            })
        }
        Command::CollapseTime(args) => {
            let config = RunConfig::CollapseTime(CollapseTimeConfig {
                seed: cli.seed,
                lambda: args.lambda,
                delta_m_squared: args.delta_m_squared,
            });
            let results = CollapseTimeResults {
                estimate_s: collapse_time_estimate(args.lambda, args.delta_m_squared)?,
            };
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::collapse_time_csv(&config, &results)?,
            })
        }
        Command::Heating(args) => {
            let config = RunConfig::Heating(HeatingConfig {
                seed: cli.seed,
                lambda: args.lambda,
                mass_kg: args.mass_kg,
                r_c_m: args.r_c_m,
            });
            let report = cosmology_consistency(args.lambda)?;
            let results = HeatingResults {
                heating_rate_w: heating_rate_per_particle(args.lambda, args.mass_kg, args.r_c_m)?,
                cosmology_ratio: report.ratio,
                cosmology_compatible: report.flag == CosmologyFlag::Compatible,
            };
            Ok(match cli.format {
                Format::Json => output::to_json(&Envelope {
                    schema_version: SCHEMA_VERSION,
                    config,
                    results,
                })?,
                Format::Csv => output::heating_csv(&config, &results)?,
            })
        }
    }
}
