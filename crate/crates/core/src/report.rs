//! Report emission and configuration parsing.
//!
//! A run report is three files in the output directory: `summary.csv` (or
//! `.json`) with one row per run, `rounds.csv` (or `.json`) with one row per
//! client-round, and `config.json` echoing the resolved configuration.
//! CSV floats carry 12 significant digits; JSON uses exact double
//! round-trip formatting. Output bytes are a pure function of the run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reputation::Indicator;
use crate::simulator::{Aggregator, HonestyClass, RoundRecord, RunConfig, RunOutput};

/// Report file format for the tabular outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::config(format!("unknown format '{other}'"))),
        }
    }
}

/// One summary-table row; the columns mirror the sweep axes plus outcome
/// counters and final accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub run: String,
    pub seed: u64,
    pub aggregator: Aggregator,
    pub reputation_enabled: bool,
    pub num_clients: usize,
    pub rounds_completed: u32,
    pub liar_fraction: f64,
    pub threshold: f64,
    pub attack: String,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub innocent_drops: usize,
    pub liars_survived: usize,
    pub attackers_dropped: usize,
    pub total_dropouts: usize,
    pub mean_utility_reliable: Option<f64>,
    pub mean_utility_unreliable: Option<f64>,
    pub delta_acc_vs_clean: Option<f64>,
    pub terminated_early: bool,
}

impl SummaryRow {
    pub fn new(run: impl Into<String>, output: &RunOutput) -> Self {
        let config = &output.resolved_config;
        let s = &output.summary;
        SummaryRow {
            run: run.into(),
            seed: config.seed,
            aggregator: config.aggregator,
            reputation_enabled: config.reputation_enabled,
            num_clients: config.num_clients,
            rounds_completed: s.rounds_completed,
            liar_fraction: config.liar_fraction,
            threshold: config.bands.reliability_threshold,
            attack: format!("{:?}", config.attack.kind).to_ascii_lowercase(),
            test_accuracy: s.final_test_accuracy,
            train_accuracy: s.final_train_accuracy,
            val_accuracy: s.final_val_accuracy,
            innocent_drops: s.innocent_drops,
            liars_survived: s.liars_survived,
            attackers_dropped: s.attackers_dropped,
            total_dropouts: s.total_dropouts,
            mean_utility_reliable: s.mean_utility_reliable,
            mean_utility_unreliable: s.mean_utility_unreliable,
            delta_acc_vs_clean: s.delta_acc_vs_clean,
            terminated_early: s.terminated_early,
        }
    }
}

/// Formats a float with 12 significant digits, stable across platforms.
fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Parses a full run configuration from JSON text, applying defaults for
/// missing sections and rejecting unknown keys, then validates it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::config(format!("invalid config: {e}")))?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

/// Serializes the resolved configuration; parsing this back reproduces the
/// run bit-exactly.
pub fn config_to_json(config: &RunConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    text
}

const SUMMARY_HEADER: [&str; 20] = [
    "run",
    "seed",
    "aggregator",
    "reputation_enabled",
    "num_clients",
    "rounds_completed",
    "liar_fraction",
    "threshold",
    "attack",
    "test_accuracy",
    "train_accuracy",
    "val_accuracy",
    "innocent_drops",
    "liars_survived",
    "attackers_dropped",
    "total_dropouts",
    "mean_utility_reliable",
    "mean_utility_unreliable",
    "delta_acc_vs_clean",
    "terminated_early",
];

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("csv write");
    for r in rows {
        let agg = match r.aggregator {
            Aggregator::Sle => "SLE",
            Aggregator::FedAvg => "FedAvg",
        };
        w.write_record([
            r.run.clone(),
            r.seed.to_string(),
            agg.to_string(),
            r.reputation_enabled.to_string(),
            r.num_clients.to_string(),
            r.rounds_completed.to_string(),
            fmt_float(r.liar_fraction),
            fmt_float(r.threshold),
            r.attack.clone(),
            fmt_float(r.test_accuracy),
            fmt_float(r.train_accuracy),
            fmt_float(r.val_accuracy),
            r.innocent_drops.to_string(),
            r.liars_survived.to_string(),
            r.attackers_dropped.to_string(),
            r.total_dropouts.to_string(),
            fmt_opt(r.mean_utility_reliable),
            fmt_opt(r.mean_utility_unreliable),
            fmt_opt(r.delta_acc_vs_clean),
            r.terminated_early.to_string(),
        ])
        .expect("csv write");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

const ROUNDS_HEADER: [&str; 19] = [
    "round",
    "client_id",
    "honesty",
    "attacker",
    "contribution",
    "observed_latency",
    "expected_latency",
    "r_inferred",
    "resource_indicator",
    "privacy_indicator",
    "p_resources",
    "p_privacy",
    "p_reliability",
    "dropped",
    "incentive",
    "utility",
    "train_accuracy",
    "val_accuracy",
    "test_accuracy",
];

/// Round log as CSV. The three trailing columns carry the global model's
/// per-round accuracies (identical across the round's rows) so the file is
/// directly plot-ready.
pub fn rounds_csv(output: &RunOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ROUNDS_HEADER).expect("csv write");
    let s = &output.summary;
    for r in &output.records {
        let round = r.round as usize;
        w.write_record([
            r.round.to_string(),
            r.client_id.to_string(),
            r.honesty.to_string(),
            r.attacker.to_string(),
            fmt_float(r.contribution),
            fmt_float(r.observed_latency),
            fmt_float(r.expected_latency),
            fmt_float(r.r_inferred),
            r.resource_indicator.to_string(),
            r.privacy_indicator.to_string(),
            fmt_float(r.p_resources),
            fmt_float(r.p_privacy),
            fmt_float(r.p_reliability),
            r.dropped.to_string(),
            fmt_float(r.incentive),
            fmt_float(r.utility),
            fmt_float(s.train_accuracy.get(round).copied().unwrap_or(f64::NAN)),
            fmt_float(s.val_accuracy.get(round).copied().unwrap_or(f64::NAN)),
            fmt_float(s.test_accuracy.get(round).copied().unwrap_or(f64::NAN)),
        ])
        .expect("csv write");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<T> {
    let cell = record
        .get(idx)
        .ok_or_else(|| Error::parse("rounds.csv", format!("line {line}"), format!("missing {name}")))?;
    cell.parse().map_err(|_| {
        Error::parse(
            "rounds.csv",
            format!("line {line}"),
            format!("bad {name}: '{cell}'"),
        )
    })
}

fn parse_indicator(s: &str) -> Result<Indicator> {
    match s {
        "belief" => Ok(Indicator::Belief),
        "uncertainty" => Ok(Indicator::Uncertainty),
        "disbelief" => Ok(Indicator::Disbelief),
        other => Err(Error::config(format!("unknown indicator '{other}'"))),
    }
}

fn parse_honesty(s: &str) -> Result<HonestyClass> {
    match s {
        "honest" => Ok(HonestyClass::Honest),
        "resource_liar" => Ok(HonestyClass::ResourceLiar),
        "privacy_liar" => Ok(HonestyClass::PrivacyLiar),
        other => Err(Error::config(format!("unknown honesty class '{other}'"))),
    }
}

/// Parses a rounds CSV back into records (the accuracy columns are
/// report-only and skipped).
pub fn parse_rounds_csv(text: &str) -> Result<Vec<RoundRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse("rounds.csv", "header", e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse("rounds.csv", "header", format!("missing column {name}")))
    };
    let idx: Vec<usize> = ROUNDS_HEADER[..16].iter().map(|n| col(n)).collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no as u64 + 2;
        let record = record.map_err(|e| Error::parse("rounds.csv", format!("line {line}"), e.to_string()))?;
        let get_str = |k: usize| record.get(idx[k]).unwrap_or_default().to_string();
        records.push(RoundRecord {
            round: parse_field(&record, idx[0], "round", line)?,
            client_id: parse_field(&record, idx[1], "client_id", line)?,
            honesty: parse_honesty(&get_str(2))?,
            attacker: parse_field(&record, idx[3], "attacker", line)?,
            contribution: parse_field(&record, idx[4], "contribution", line)?,
            observed_latency: parse_field(&record, idx[5], "observed_latency", line)?,
            expected_latency: parse_field(&record, idx[6], "expected_latency", line)?,
            r_inferred: parse_field(&record, idx[7], "r_inferred", line)?,
            resource_indicator: parse_indicator(&get_str(8))?,
            privacy_indicator: parse_indicator(&get_str(9))?,
            p_resources: parse_field(&record, idx[10], "p_resources", line)?,
            p_privacy: parse_field(&record, idx[11], "p_privacy", line)?,
            p_reliability: parse_field(&record, idx[12], "p_reliability", line)?,
            dropped: parse_field(&record, idx[13], "dropped", line)?,
            incentive: parse_field(&record, idx[14], "incentive", line)?,
            utility: parse_field(&record, idx[15], "utility", line)?,
        });
    }
    Ok(records)
}

/// Round log as a JSON array of records.
pub fn rounds_json(output: &RunOutput) -> String {
    let mut text = serde_json::to_string_pretty(&output.records).expect("records serialize");
    text.push('\n');
    text
}

pub fn summary_json(rows: &[SummaryRow]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes the three report files for one run. Returns the paths written.
pub fn write_run_report(
    out_dir: &Path,
    label: &str,
    output: &RunOutput,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let row = SummaryRow::new(label, output);
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            let summary_path = out_dir.join("summary.csv");
            fs::write(&summary_path, summary_csv(std::slice::from_ref(&row)))?;
            written.push(summary_path);
            let rounds_path = out_dir.join("rounds.csv");
            fs::write(&rounds_path, rounds_csv(output))?;
            written.push(rounds_path);
        }
        ReportFormat::Json => {
            let summary_path = out_dir.join("summary.json");
            fs::write(&summary_path, summary_json(std::slice::from_ref(&row)))?;
            written.push(summary_path);
            let rounds_path = out_dir.join("rounds.json");
            fs::write(&rounds_path, rounds_json(output))?;
            written.push(rounds_path);
        }
    }
    let config_path = out_dir.join("config.json");
    fs::write(&config_path, config_to_json(&output.resolved_config))?;
    written.push(config_path);
    Ok(written)
}

/// Writes a combined sweep report: one summary table at the top level and a
/// per-run subdirectory with the round log and resolved config.
pub fn write_sweep_report(
    out_dir: &Path,
    entries: &[(String, RunOutput)],
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let rows: Vec<SummaryRow> = entries
        .iter()
        .map(|(label, output)| SummaryRow::new(label, output))
        .collect();
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            let path = out_dir.join("summary.csv");
            fs::write(&path, summary_csv(&rows))?;
            written.push(path);
        }
        ReportFormat::Json => {
            let path = out_dir.join("summary.json");
            fs::write(&path, summary_json(&rows))?;
            written.push(path);
        }
    }
    for (label, output) in entries {
        let sub = out_dir.join(label);
        fs::create_dir_all(&sub)?;
        match format {
            ReportFormat::Csv => {
                let path = sub.join("rounds.csv");
                fs::write(&path, rounds_csv(output))?;
                written.push(path);
            }
            ReportFormat::Json => {
                let path = sub.join("rounds.json");
                fs::write(&path, rounds_json(output))?;
                written.push(path);
            }
        }
        let config_path = sub.join("config.json");
        fs::write(&config_path, config_to_json(&output.resolved_config))?;
        written.push(config_path);
    }
    Ok(written)
}
