//! Deterministic CSV and JSON rendering, plus parsers so tests can prove
//! the files round-trip losslessly.
//!
//! Floats in CSV are printed with 17 significant digits (`{:.16e}`),
//! which round-trips every f64 exactly. JSON goes through serde_json,
//! whose shortest-representation floats also round-trip.

use serde::de::DeserializeOwned;
use serde::Serialize;

use csl_core::{MartingaleRecord, Trajectory};

use crate::run::{
    BoundsResults, EnsembleResults, EnsembleSummary, Envelope, RunConfig, RuinResults,
    CollapseTimeResults, HeatingResults, SCHEMA_VERSION,
};

/// 17 significant digits: lossless for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> anyhow::Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn csv_preamble(config: &RunConfig) -> anyhow::Result<String> {
    let config_json = serde_json::to_string(config)?;
    Ok(format!(
        "# schema_version={SCHEMA_VERSION}\n# config={config_json}\n"
    ))
}

pub fn trajectory_csv(config: &RunConfig, traj: &Trajectory) -> anyhow::Result<String> {
    let dim = traj
        .probabilities
        .first()
        .map(|row| row.len())
        .unwrap_or(0);
    let mut out = csv_preamble(config)?;
    let p_cols: Vec<String> = (0..dim).map(|i| format!("p_{i}")).collect();
    out.push_str(&format!(
        "time,{},expectation_M,variance_M\n",
        p_cols.join(",")
    ));
    for (((t, probs), em), vm) in traj
        .times
        .iter()
        .zip(&traj.probabilities)
        .zip(&traj.expectation)
        .zip(&traj.variance)
    {
        let p_cells: Vec<String> = probs.iter().copied().map(fmt_f64).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(*t),
            p_cells.join(","),
            fmt_f64(*em),
            fmt_f64(*vm)
        ));
    }
    Ok(out)
}

pub fn ensemble_csv(config: &RunConfig, results: &EnsembleResults) -> anyhow::Result<String> {
    let mut out = csv_preamble(config)?;
    let summary_json = serde_json::to_string(&results.summary)?;
    out.push_str(&format!("# summary={summary_json}\n"));
    let dim = results
        .record
        .mean
        .first()
        .map(|row| row.len())
        .unwrap_or(0);
    let mean_cols: Vec<String> = (0..dim).map(|i| format!("mean_p_{i}")).collect();
    let se_cols: Vec<String> = (0..dim).map(|i| format!("std_err_p_{i}")).collect();
    out.push_str(&format!(
        "time,{},{}\n",
        mean_cols.join(","),
        se_cols.join(",")
    ));
    for ((t, mean_row), se_row) in results
        .record
        .times
        .iter()
        .zip(&results.record.mean)
        .zip(&results.record.std_err)
    {
        let cells: Vec<String> = mean_row
            .iter()
            .chain(se_row)
            .copied()
            .map(fmt_f64)
            .collect();
        out.push_str(&format!("{},{}\n", fmt_f64(*t), cells.join(",")));
    }
    Ok(out)
}

pub fn ruin_csv(config: &RunConfig, results: &RuinResults) -> anyhow::Result<String> {
    let mut out = csv_preamble(config)?;
    out.push_str(
        "n_games,alice_wins,win_frequency,mean_length,exact_win_probability,exact_mean_length\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{}\n",
        results.simulation.n_games,
        results.simulation.alice_wins,
        fmt_f64(results.simulation.win_frequency),
        fmt_f64(results.simulation.mean_length),
        fmt_f64(results.exact_win_probability),
        fmt_f64(results.exact_mean_length),
    ));
    Ok(out)
}

pub fn bounds_csv(config: &RunConfig, results: &BoundsResults) -> anyhow::Result<String> {
    let mut out = csv_preamble(config)?;
    out.push_str("name,kind,orders_above_conventional,lambda_max,orders_above_enhanced\n");
    for row in &results.rows {
        out.push_str(&format!(
            "\"{}\",{:?},{},{},{}\n",
            row.name,
            row.kind,
            row.orders_above_conventional,
            fmt_f64(row.lambda_max),
            row.orders_above_enhanced,
        ));
    }
    Ok(out)
}

pub fn collapse_time_csv(
    config: &RunConfig,
    results: &CollapseTimeResults,
) -> anyhow::Result<String> {
    let mut out = csv_preamble(config)?;
    out.push_str("estimate_s\n");
    out.push_str(&format!("{}\n", fmt_f64(results.estimate_s)));
    Ok(out)
}

pub fn heating_csv(config: &RunConfig, results: &HeatingResults) -> anyhow::Result<String> {
    let mut out = csv_preamble(config)?;
    out.push_str("heating_rate_w,cosmology_ratio,cosmology_compatible\n");
    out.push_str(&format!(
        "{},{},{}\n",
        fmt_f64(results.heating_rate_w),
        fmt_f64(results.cosmology_ratio),
        results.cosmology_compatible,
    ));
    Ok(out)
}

/// A parsed CSV document: the preamble comments plus the table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub schema_version: u32,
    pub config: RunConfig,
    /// Extra `# key=json` comment entries beyond the config.
    pub extras: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> anyhow::Result<CsvFile> {
    let mut schema_version = None;
    let mut config = None;
    let mut extras = Vec::new();
    let mut header = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(comment) = line.strip_prefix("# ") {
            let (key, value) = comment
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("malformed comment line: {line}"))?;
            match key {
                "schema_version" => schema_version = Some(value.parse()?),
                "config" => config = Some(serde_json::from_str(value)?),
                _ => extras.push((key.to_string(), value.to_string())),
            }
        } else if header.is_none() {
            header = Some(line.split(',').map(str::to_string).collect());
        } else {
            rows.push(split_row(line));
        }
    }
    Ok(CsvFile {
        schema_version: schema_version
            .ok_or_else(|| anyhow::anyhow!("missing schema_version"))?,
        config: config.ok_or_else(|| anyhow::anyhow!("missing config"))?,
        extras,
        header: header.ok_or_else(|| anyhow::anyhow!("missing header"))?,
        rows,
    })
}

/// Splits a CSV row, honoring the double quotes used for name cells.
fn split_row(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cell = String::new();
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => cells.push(std::mem::take(&mut cell)),
            _ => cell.push(ch),
        }
    }
    cells.push(cell);
    cells
}

/// Trajectory record rows reconstructed from a CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub expectation: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Rebuilds the trajectory record rows from a parsed CSV, for round-trip
/// checks.
pub fn trajectory_from_csv(file: &CsvFile) -> anyhow::Result<TrajectoryTable> {
    let dim = file.header.len() - 3;
    let mut table = TrajectoryTable {
        times: Vec::new(),
        probabilities: Vec::new(),
        expectation: Vec::new(),
        variance: Vec::new(),
    };
    for row in &file.rows {
        table.times.push(row[0].parse::<f64>()?);
        table.probabilities.push(
            row[1..1 + dim]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()?,
        );
        table.expectation.push(row[1 + dim].parse::<f64>()?);
        table.variance.push(row[2 + dim].parse::<f64>()?);
    }
    Ok(table)
}

/// Rebuilds an ensemble martingale record and summary from a parsed CSV.
pub fn ensemble_from_csv(
    file: &CsvFile,
    n_trajectories: u64,
) -> anyhow::Result<(EnsembleSummary, MartingaleRecord)> {
    let summary_json = file
        .extras
        .iter()
        .find(|(k, _)| k == "summary")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| anyhow::anyhow!("missing summary comment"))?;
    let summary: EnsembleSummary = serde_json::from_str(summary_json)?;
    let dim = (file.header.len() - 1) / 2;
    let mut times = Vec::new();
    let mut mean = Vec::new();
    let mut std_err = Vec::new();
    for row in &file.rows {
        times.push(row[0].parse::<f64>()?);
        mean.push(
            row[1..1 + dim]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()?,
        );
        std_err.push(
            row[1 + dim..1 + 2 * dim]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()?,
        );
    }
    Ok((
        summary,
        MartingaleRecord {
            times,
            mean,
            std_err,
            n_trajectories,
        },
    ))
}

/// Parses a JSON envelope back into typed structures.
pub fn envelope_from_json<R: DeserializeOwned>(text: &str) -> anyhow::Result<Envelope<R>> {
    from_json(text)
}
