//! CLI contract tests: exit codes, validation, and lossless round-trips
//! of the emitted files.

use std::process::Command;

use clap::Parser;

use csl_cli::cli::Cli;
use csl_cli::output;
use csl_cli::run::{render, Envelope, EnsembleResults, RunConfig};
use csl_core::Trajectory;

fn render_args(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(args).unwrap();
    render(&cli).unwrap()
}

#[test]
fn usage_errors_exit_with_code_2() {
    let bin = env!("CARGO_BIN_EXE_csl");
    for args in [
        vec!["ensemble", "--p0", "1.5"],
        vec!["ensemble", "--no-such-flag"],
        vec!["trajectory", "--epsilon", "0.7"],
        vec!["trajectory", "--spectrum", "cutoff"], // missing --omega-max
        vec!["ruin", "--n", "0"],
        vec!["collapse-time", "--lambda", "-1"],
        vec!["trajectory", "--dt", "50", "--t-final", "2"],
    ] {
        let out = Command::new(bin).args(&args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: status {:?}, stderr: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty(), "args {args:?} should explain the error");
    }
}

#[test]
fn help_lists_every_command() {
    let bin = env!("CARGO_BIN_EXE_csl");
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for command in [
        "trajectory",
        "ensemble",
        "ruin",
        "bounds",
        "collapse-time",
        "heating",
    ] {
        assert!(text.contains(command), "--help missing {command}");
    }
    // Defaults are documented.
    let out = Command::new(bin).args(["ensemble", "--help"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("default: 0.3"));
    assert!(text.contains("default: 10000"));
}

#[test]
fn spec_example_flags_parse_to_the_stated_config() {
    let cli = Cli::try_parse_from([
        "csl", "ensemble", "--p0", "0.3", "--lambda", "1e-2", "--n", "10000", "--seed", "42",
    ])
    .unwrap();
    assert_eq!(cli.seed, 42);
    match cli.command {
        csl_cli::cli::Command::Ensemble(ref args) => {
            assert_eq!(args.dynamics.p0, 0.3);
            assert_eq!(args.dynamics.lambda, 1e-2);
            assert_eq!(args.n, 10_000);
        }
        _ => panic!("wrong command"),
    }
}

#[test]
fn trajectory_json_and_csv_round_trip_exactly() {
    let args = [
        "csl", "trajectory", "--p0", "0.4", "--lambda", "1", "--t-final", "5",
        "--sample-every", "7", "--seed", "11",
    ];
    let json = render_args(&[&args[..], &["--format", "json"]].concat());
    let envelope: Envelope<Trajectory> = output::envelope_from_json(&json).unwrap();
    assert_eq!(envelope.schema_version, 1);
    let RunConfig::Trajectory(config) = &envelope.config else {
        panic!("wrong config variant");
    };
    assert_eq!(config.seed, 11);
    assert_eq!(config.p0, 0.4);
    // Re-serializing the parsed envelope reproduces the file byte for byte.
    assert_eq!(output::to_json(&envelope).unwrap(), json);

    let csv = render_args(&[&args[..], &["--format", "csv"]].concat());
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(file.schema_version, 1);
    assert_eq!(file.config, envelope.config);
    let table = output::trajectory_from_csv(&file).unwrap();
    let traj = &envelope.results;
    assert_eq!(table.times, traj.times);
    assert_eq!(table.probabilities, traj.probabilities);
    assert_eq!(table.expectation, traj.expectation);
    assert_eq!(table.variance, traj.variance);
    assert_eq!(file.header[0], "time");
    assert_eq!(file.header[1], "p_0");
    assert_eq!(*file.header.last().unwrap(), "variance_M");
}

#[test]
fn ensemble_csv_round_trips_exactly() {
    let args = [
        "csl", "ensemble", "--p0", "0.3", "--lambda", "1", "--n", "500", "--seed", "3",
    ];
    let json = render_args(&[&args[..], &["--format", "json"]].concat());
    let envelope: Envelope<EnsembleResults> = output::envelope_from_json(&json).unwrap();

    let csv = render_args(&[&args[..], &["--format", "csv"]].concat());
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(file.config, envelope.config);
    let (summary, record) = output::ensemble_from_csv(&file, 500).unwrap();
    assert_eq!(summary, envelope.results.summary);
    assert_eq!(record, envelope.results.record);
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "csl", "ensemble", "--p0", "0.2", "--lambda", "2", "--n", "300", "--seed", "19",
        "--format", "csv",
    ];
    assert_eq!(render_args(&args), render_args(&args));
}

#[test]
fn bounds_csv_has_the_eight_rows() {
    let csv = render_args(&["csl", "bounds", "--format", "csv"]);
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(file.rows.len(), 8);
    assert_eq!(
        file.header,
        vec![
            "name",
            "kind",
            "orders_above_conventional",
            "lambda_max",
            "orders_above_enhanced"
        ]
    );
    assert_eq!(file.rows[0][0], "Fullerene diffraction experiments");
    assert_eq!(file.rows[3][2], "18");
}

#[test]
fn runtime_failures_exit_with_code_1() {
    let bin = env!("CARGO_BIN_EXE_csl");
    let out = Command::new(bin)
        .args(["bounds", "--out", "/nonexistent-dir/x.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("csl: "), "stderr: {stderr}");
}

#[test]
fn ensemble_command_reproduces_the_born_tally() {
    // The flags from the documented example: the tally's outcome-1
    // frequency must sit inside the 3-sigma binomial band around p0.
    let json = render_args(&[
        "csl", "ensemble", "--p0", "0.3", "--lambda", "1e-2", "--n", "10000", "--seed", "42",
    ]);
    let envelope: Envelope<EnsembleResults> = output::envelope_from_json(&json).unwrap();
    let freq = envelope.results.summary.decided_frequencies[1];
    assert!((freq - 0.30).abs() < 0.014, "outcome-1 frequency {freq}");
    assert!(envelope.results.summary.undecided_fraction < 0.01);
}

#[test]
fn ruin_command_matches_the_exact_probability() {
    let json = render_args(&["csl", "ruin", "--a", "3", "--b", "1", "--n", "10000", "--seed", "42"]);
    let envelope: Envelope<csl_cli::run::RuinResults> = output::envelope_from_json(&json).unwrap();
    let exact = envelope.results.exact_win_probability;
    assert!((exact - 0.75).abs() < 1e-12);
    let freq = envelope.results.simulation.win_frequency;
    let band = 3.0 * (0.75f64 * 0.25 / 10_000.0).sqrt();
    assert!((freq - exact).abs() < band, "{freq} vs {exact} +- {band}");

    // The CSV carries the same numbers, losslessly.
    let csv = render_args(&[
        "csl", "ruin", "--a", "3", "--b", "1", "--n", "10000", "--seed", "42", "--format", "csv",
    ]);
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(file.rows.len(), 1);
    assert_eq!(file.rows[0][2].parse::<f64>().unwrap(), freq);
    assert_eq!(file.rows[0][4].parse::<f64>().unwrap(), exact);
}

#[test]
fn single_row_csvs_round_trip() {
    let json = render_args(&["csl", "heating", "--lambda", "1e-17"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let csv = render_args(&["csl", "heating", "--lambda", "1e-17", "--format", "csv"]);
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(
        file.rows[0][0].parse::<f64>().unwrap(),
        v["results"]["heating_rate_w"].as_f64().unwrap()
    );

    let json = render_args(&["csl", "collapse-time"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let csv = render_args(&["csl", "collapse-time", "--format", "csv"]);
    let file = output::parse_csv(&csv).unwrap();
    assert_eq!(
        file.rows[0][0].parse::<f64>().unwrap(),
        v["results"]["estimate_s"].as_f64().unwrap()
    );
}

#[test]
fn collapse_time_and_heating_commands() {
    let json = render_args(&["csl", "collapse-time", "--lambda", "1e-17", "--delta-m-squared", "1e24"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let estimate = v["results"]["estimate_s"].as_f64().unwrap();
    assert!((estimate.log10() + 7.0).abs() < 1e-12);

    let json = render_args(&["csl", "heating", "--lambda", "1e-17"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rate = v["results"]["heating_rate_w"].as_f64().unwrap();
    assert!((rate - 4.987061281836664e-45).abs() / rate < 1e-12);
    assert_eq!(v["results"]["cosmology_compatible"], serde_json::Value::Bool(true));
}
