//! Statistical properties of the collapse dynamics: Born frequencies,
//! the martingale property (with a drifted negative control), undecided
//! fractions, collapse-time scales, and the agreement between the
//! trajectory ensemble and the averaged master equation.
//!
//! Every run is seeded, so the assertions are deterministic; the bands
//! are 3-sigma or looser.

use csl_core::{
    aggregate, classify_outcome, collapse_time_estimate, evolve_density, evolve_trajectory,
    martingale_test, run_ensemble, sde_step, ComplexMatrix, Complex64, CslParams, DensityMatrix,
    DiagonalObservable, EnsembleConfig, EnsembleMember, NoiseProcess, NoiseSpectrum, StateVector,
    derive_stream_seed,
};

fn two_level_config(
    p1: f64,
    lambda: f64,
    t_final: f64,
    n: u64,
    seed: u64,
    sample_every: u32,
) -> EnsembleConfig {
    let params = CslParams::new(lambda, 0.01).unwrap();
    let mut cfg = EnsembleConfig::two_level(p1, 1.0, params, t_final, n, seed).unwrap();
    cfg.sample_every = sample_every;
    cfg
}

#[test]
fn born_frequencies_match_initial_weights() {
    // lambda dM^2 t_final = 20; frequencies of outcome 1 within 3 sigma
    // binomial of the initial Born weight, undecided below 1%.
    let n = 10_000u64;
    for (p1, seed) in [(0.1, 11u64), (0.3, 12), (0.5, 13), (0.9, 14)] {
        let run = run_ensemble(&two_level_config(p1, 1.0, 20.0, n, seed, 100)).unwrap();
        assert!(
            run.tally.undecided_fraction() < 0.01,
            "p1={p1}: undecided {}",
            run.tally.undecided_fraction()
        );
        let freq = run.tally.decided_frequency(1);
        let band = 3.0 * (p1 * (1.0 - p1) / n as f64).sqrt();
        assert!(
            (freq - p1).abs() < band,
            "p1={p1}: frequency {freq} not within {band}"
        );
    }
}

#[test]
fn martingale_statistic_stays_below_three() {
    let config = two_level_config(0.3, 1.0, 2.0, 2_000, 31, 10);
    assert!(config.sample_times().len() >= 20);
    let run = run_ensemble(&config).unwrap();
    let p0 = config.initial.probabilities().unwrap();
    let z = martingale_test(&run.record, &p0).unwrap();
    assert!(z < 3.0, "martingale statistic {z}");
}

#[test]
fn drifted_dynamics_fails_the_martingale_test() {
    // Negative control: the same diffusion with an extra +0.1 dt drift on
    // p blows far past the 3-sigma band.
    let config = two_level_config(0.3, 1.0, 2.0, 2_000, 33, 10);
    let lambda = config.params.lambda;
    let dt = config.params.dt;
    let n_steps = (config.t_final / dt).round() as u64;
    let sample_every = config.sample_every as u64;

    let members: Vec<EnsembleMember> = (0..config.n_trajectories)
        .map(|index| {
            let mut noise = NoiseProcess::new(
                derive_stream_seed(config.master_seed, index),
                1,
                NoiseSpectrum::White,
            )
            .unwrap();
            let mut p: f64 = 0.3;
            let mut rows = vec![1.0 - p, p];
            for step in 1..=n_steps {
                let dw = noise.increment(0, dt);
                p += 2.0 * lambda.sqrt() * p * (1.0 - p) * dw + 0.1 * dt;
                p = p.clamp(0.0, 1.0);
                if step % sample_every == 0 {
                    rows.extend_from_slice(&[1.0 - p, p]);
                }
            }
            EnsembleMember {
                index,
                outcome: None,
                collapse_time: None,
                probabilities: rows,
            }
        })
        .collect();

    let run = aggregate(&config, &members).unwrap();
    let z = martingale_test(&run.record, &[0.7, 0.3]).unwrap();
    assert!(z > 10.0, "drifted control should fail loudly, got {z}");
}

#[test]
fn undecided_fraction_shrinks_with_run_length() {
    let mut fractions = Vec::new();
    for (i, t_final) in [1.0, 2.0, 4.0, 8.0, 16.0].into_iter().enumerate() {
        let run =
            run_ensemble(&two_level_config(0.5, 1.0, t_final, 2_000, 40 + i as u64, 100)).unwrap();
        fractions.push(run.tally.undecided_fraction());
    }
    for pair in fractions.windows(2) {
        assert!(pair[1] <= pair[0], "{fractions:?}");
    }
    assert!(*fractions.last().unwrap() < 0.01, "{fractions:?}");
}

#[test]
fn median_collapse_time_tracks_the_estimate() {
    // lambda = 1e-2, dM^2 = 1: estimate is 100. The measured median
    // depends logarithmically on the decision threshold; at eps = 1e-2
    // it lands within a factor 3.
    let lambda = 1e-2;
    let estimate = collapse_time_estimate(lambda, 1.0).unwrap();
    let params = CslParams::new(lambda, 1.0).unwrap();
    let mut config =
        EnsembleConfig::two_level(0.5, 1.0, params, 30.0 * estimate, 1_500, 55).unwrap();
    config.collapse_epsilon = 1e-2;
    config.sample_every = 100;
    let run = run_ensemble(&config).unwrap();
    assert!(run.tally.undecided == 0);
    let median = run.median_collapse_time.unwrap();
    assert!(
        median < 3.0 * estimate && median > estimate / 3.0,
        "median {median} vs estimate {estimate}"
    );
}

#[test]
fn trajectory_ensemble_average_matches_master_equation() {
    // |mean of c0 c1*| over trajectories vs the closed-form off-diagonal
    // decay exp(-lambda dM^2 t / 2) and the integrated master equation.
    let lambda = 1.0_f64;
    let dt = 0.01_f64;
    let t_final = 1.0_f64;
    let steps = (t_final / dt).round() as usize;
    let n = 4_000u64;
    let params = CslParams::new(lambda, dt).unwrap();
    let h = ComplexMatrix::zeros(2);
    let m = DiagonalObservable::two_level(1.0);

    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut noise =
            NoiseProcess::new(derive_stream_seed(77, i), 1, NoiseSpectrum::White).unwrap();
        let mut state = StateVector::two_level(0.5).unwrap();
        for _ in 0..steps {
            state = sde_step(&state, &h, &m, &params, &mut noise).unwrap();
        }
        sum += state.amplitudes()[0] * state.amplitudes()[1].conj();
    }
    let measured = (sum / n as f64).norm();
    let closed_form = 0.5 * (-0.5 * lambda * t_final).exp();
    assert!(
        (measured - closed_form).abs() / closed_form < 0.05,
        "measured {measured} vs {closed_form}"
    );

    let rho0 = DensityMatrix::from_state(&StateVector::two_level(0.5).unwrap()).unwrap();
    let rho_t = evolve_density(&rho0, &h, &m, &params, t_final).unwrap();
    let integrated = rho_t.get(0, 1).norm();
    assert!(
        (measured - integrated).abs() / integrated < 0.05,
        "measured {measured} vs integrated {integrated}"
    );
}

#[test]
fn classify_agrees_with_trajectory_outcome() {
    let params = CslParams::new(1.0, 0.01).unwrap();
    let m = DiagonalObservable::two_level(1.0);
    let h = ComplexMatrix::zeros(2);
    let initial = StateVector::two_level(0.4).unwrap();
    for seed in 0..20u64 {
        let mut noise = NoiseProcess::new(seed, 1, NoiseSpectrum::White).unwrap();
        let traj =
            evolve_trajectory(&initial, &h, &m, &params, 30.0, 10, 1e-3, &mut noise).unwrap();
        let reclassified = classify_outcome(&traj.final_state, 1e-3).unwrap();
        assert_eq!(traj.outcome, reclassified, "seed {seed}");
    }
}
