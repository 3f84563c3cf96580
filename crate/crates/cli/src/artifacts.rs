//! CSV tables and JSON sidecars.
//!
//! Every command writes one CSV with the fixed header
//! `<index>,analytic,oracle,mc_estimate,mc_stderr` (missing quantities are
//! empty cells) and a JSON sidecar carrying the model, the effective
//! configuration, per-row labels and every analytic-vs-oracle comparison
//! with the tolerance applied. Numeric cells use Rust's shortest
//! round-trip float formatting, so parse(format(x)) == x exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// One table row; `None` renders as an empty cell.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub index: f64,
    pub analytic: Option<f64>,
    pub oracle: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
}

/// A CSV table with a named index column (x, n, h or t).
#[derive(Debug, Clone)]
pub struct Table {
    pub index_name: &'static str,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(index_name: &'static str) -> Self {
        Table { index_name, rows: Vec::new() }
    }

    fn to_csv(&self) -> String {
        let mut out = format!("{},analytic,oracle,mc_estimate,mc_stderr\n", self.index_name);
        for r in &self.rows {
            out.push_str(&fmt_cell(Some(r.index)));
            for v in [r.analytic, r.oracle, r.mc_estimate, r.mc_stderr] {
                out.push(',');
                out.push_str(&fmt_cell(v));
            }
            out.push('\n');
        }
        out
    }
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        // Shortest round-trip decimal form.
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// An analytic-vs-oracle comparison recorded in the sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRecord {
    pub analytic: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl ComparisonRecord {
    pub fn new(analytic: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_diff = (analytic - oracle).abs();
        ComparisonRecord {
            analytic,
            oracle,
            abs_diff,
            tolerance,
            within_tolerance: abs_diff <= tolerance,
        }
    }
}

/// JSON sidecar with full provenance for one command invocation.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub command: String,
    pub model: Option<serde_json::Value>,
    pub effective_config: serde_json::Value,
    pub outputs: Vec<String>,
    pub oracle_deltas: BTreeMap<String, ComparisonRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    /// Volatile timing field; everything else in the artifacts is
    /// deterministic for a pinned seed.
    pub wall_time_seconds: f64,
}

/// Write the table and sidecar under `out_dir` with the given basename.
/// Returns the CSV path.
pub fn write_artifacts(
    out_dir: &Path,
    basename: &str,
    table: &Table,
    sidecar: &mut Sidecar,
) -> std::io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{basename}.csv"));
    let json_path = out_dir.join(format!("{basename}.json"));
    sidecar.outputs = vec![csv_path.display().to_string(), json_path.display().to_string()];
    fs::write(&csv_path, table.to_csv())?;
    fs::write(&json_path, serde_json::to_string_pretty(sidecar).expect("serializable"))?;
    Ok(csv_path)
}

/// Basename `<command>-<unix seconds>`; verify/report use fixed names so
/// reruns are byte-identical.
pub fn timestamped_basename(command: &str) -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{command}-{secs}")
}
