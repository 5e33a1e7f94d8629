use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Protocol};
use crate::error::{Error, Result};

/// One row of `metrics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub cell: String,
    pub seed: u64,
    /// `pretrained` or `random`.
    pub encoder: String,
    /// Split or target the value was measured on.
    pub split: String,
    pub metric: String,
    pub value: f64,
}

/// One line of `train_log.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub cell: String,
    pub seed: u64,
    pub epoch: usize,
    pub loss: f64,
    pub batches: usize,
    pub lr: f64,
    pub wall_ms: u64,
}

/// Heatmap-ready matrix, written as `<name>.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub name: String,
    pub corner: String,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Grid {
    pub fn new(name: &str, corner: &str, rows: Vec<String>, columns: Vec<String>) -> Self {
        let values = vec![vec![None; columns.len()]; rows.len()];
        Grid { name: name.into(), corner: corner.into(), rows, columns, values }
    }

    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.values[r][c]
    }

    pub fn set(&mut self, row: &str, column: &str, v: f64) {
        if let (Some(r), Some(c)) = (self.rows.iter().position(|x| x == row), self.columns.iter().position(|x| x == column)) {
            self.values[r][c] = Some(v);
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let header: Vec<&str> = std::iter::once(self.corner.as_str()).chain(self.columns.iter().map(String::as_str)).collect();
        w.write_record(&header).map_err(csv_err)?;
        for (r, row) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![r.clone()];
            rec.extend(row.iter().map(|v| v.map(fmt_value).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        into_string(w)
    }
}

/// Index audit of one cell: windows of the held-out domain or position
/// found in a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub cell: String,
    pub seed: u64,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub leaked: usize,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub library: String,
    pub version: String,
    pub protocol: Protocol,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub wall_ms: u64,
    pub epochs: Vec<EpochLog>,
    pub metrics: Vec<MetricRow>,
    pub grids: Vec<Grid>,
    pub audits: Vec<Audit>,
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Data(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunReport {
            library: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            protocol: config.protocol,
            config: config.clone(),
            seeds: config.all_seeds(),
            wall_ms: 0,
            epochs: vec![],
            metrics: vec![],
            grids: vec![],
            audits: vec![],
        }
    }

    /// First matching metric value.
    pub fn metric(&self, cell: &str, seed: u64, encoder: &str, split: &str, metric: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.cell == cell && m.seed == seed && m.encoder == encoder && m.split == split && m.metric == metric)
            .map(|m| m.value)
    }

    pub fn grid(&self, name: &str) -> Option<&Grid> {
        self.grids.iter().find(|g| g.name == name)
    }

    /// Total windows found on the wrong side of a split.
    pub fn leaked(&self) -> usize {
        self.audits.iter().map(|a| a.leaked).sum()
    }

    /// Metric table; excludes timings so reruns compare byte for byte.
    pub fn metrics_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["cell", "seed", "encoder", "split", "metric", "value"]).map_err(csv_err)?;
        for m in &self.metrics {
            w.write_record([&m.cell, &m.seed.to_string(), &m.encoder, &m.split, &m.metric, &fmt_value(m.value)]).map_err(csv_err)?;
        }
        into_string(w)
    }

    /// Writes `report.json`, `metrics.csv`, `train_log.jsonl` and one CSV per grid.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        fs::write(dir.join("metrics.csv"), self.metrics_csv()?)?;
        let mut log = fs::File::create(dir.join("train_log.jsonl"))?;
        for e in &self.epochs {
            writeln!(log, "{}", serde_json::to_string(e)?)?;
        }
        for g in &self.grids {
            fs::write(dir.join(format!("{}.csv", g.name)), g.to_csv()?)?;
        }
        Ok(())
    }
}
