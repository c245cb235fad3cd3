use std::path::Path;

use super::run::MANIFEST_FILE;
use super::{Mode, ScenarioError};
use crate::cabin::CabinStats;
use crate::constellation::CoverageSummary;

#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub mode: Mode,
    pub files: Vec<String>,
    pub text: String,
}

fn input_err(path: &Path, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Input {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|e| input_err(path, e.to_string()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    serde_json::from_str(&read(path)?).map_err(|e| input_err(path, format!("corrupt: {e}")))
}

/// Turns a finished run directory into plot-ready tables and a short text
/// summary.
pub fn report(dir: &Path) -> Result<ReportSummary, ScenarioError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(input_err(&manifest_path, "no run manifest; not a run directory"));
    }
    let manifest: serde_json::Value = read_json(&manifest_path)?;
    let mode: Mode = manifest
        .get("mode")
        .cloned()
        .and_then(|m| serde_json::from_value(m).ok())
        .ok_or_else(|| input_err(&manifest_path, "corrupt: missing or unknown `mode`"))?;
    match mode {
        Mode::Coverage => coverage_report(dir),
        Mode::Cabin => cabin_report(dir),
    }
}

fn coverage_report(dir: &Path) -> Result<ReportSummary, ScenarioError> {
    let timeline_path = dir.join("timeline.csv");
    let summary: CoverageSummary = read_json(&dir.join("summary.json"))?;
    let mut reader = csv::Reader::from_path(&timeline_path).map_err(|e| input_err(&timeline_path, e.to_string()))?;
    let mut rows: Vec<(String, bool)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| input_err(&timeline_path, e.to_string()))?;
        let t = rec.get(0).unwrap_or_default().to_string();
        let served = rec.get(1).is_some_and(|v| !v.is_empty());
        rows.push((t, served));
    }
    let n = rows.len().max(1) as f64;
    let mut covered = 0usize;
    let mut text = String::from("t_s,cumulative_coverage_pct\n");
    for (t, served) in &rows {
        covered += usize::from(*served);
        text.push_str(&format!("{},{:.4}\n", t, 100.0 * covered as f64 / n));
    }
    let out = dir.join("coverage_progress.csv");
    std::fs::write(&out, text).map_err(|e| ScenarioError::io(&out, e))?;
    Ok(ReportSummary {
        mode: Mode::Coverage,
        files: vec!["coverage_progress.csv".into()],
        text: format!(
            "coverage {:.2}% over {} s ({} samples)\nsatellites: {} active, {} discarded, {} pending\nhandovers: {}, total gap {} s, max gap {} s",
            summary.coverage_pct,
            summary.flight_duration_s,
            summary.n_samples,
            summary.n_satellites_active,
            summary.n_satellites_discarded,
            summary.n_satellites_pending,
            summary.n_handovers,
            summary.total_gap_s,
            summary.max_gap_s
        ),
    })
}

fn cabin_report(dir: &Path) -> Result<ReportSummary, ScenarioError> {
    let stats: CabinStats = read_json(&dir.join("tx_stats.json"))?;
    let mut table = String::from("tx_id,min_db,q1_db,median_db,q3_db,max_db,mean_db\n");
    let mut text = format!("global mean best-path loss {:.2} dB\n", stats.global_mean_db);
    for t in &stats.per_tx {
        table.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
            t.tx_id, t.min_db, t.q1_db, t.median_db, t.q3_db, t.max_db, t.mean_db
        ));
        text.push_str(&format!(
            "tx {}: mean {:.2} dB, median {:.2} dB, IQR [{:.2}, {:.2}] dB\n",
            t.tx_id, t.mean_db, t.median_db, t.q1_db, t.q3_db
        ));
    }
    let out = dir.join("boxplot.csv");
    std::fs::write(&out, table).map_err(|e| ScenarioError::io(&out, e))?;
    Ok(ReportSummary {
        mode: Mode::Cabin,
        files: vec!["boxplot.csv".into()],
        text: text.trim_end().to_string(),
    })
}
