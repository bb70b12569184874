//! Reading and writing convergence reports as JSON (full reports) or CSV
//! (`alpha,N,E_inf,rate`, one line per row).

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::harness::{ConvergenceReport, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => Ok(Self::Json),
            Some("csv") => Ok(Self::Csv),
            _ => bail!("cannot infer report format from {}", path.display()),
        }
    }
}

pub fn write_json<W: Write>(reports: &[ConvergenceReport], w: W) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> anyhow::Result<Vec<ConvergenceReport>> {
    Ok(serde_json::from_reader(r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "E_inf")]
    pub e_inf: Option<f64>,
    pub rate: Option<f64>,
}

pub fn write_csv<W: Write>(reports: &[ConvergenceReport], w: W) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for report in reports {
        for row in &report.rows {
            out.serialize(CsvRecord { alpha: report.alpha, n: row.n, e_inf: row.e_inf, rate: row.rate })?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> anyhow::Result<Vec<CsvRecord>> {
    let mut input = csv::Reader::from_reader(r);
    let mut records = Vec::new();
    for rec in input.deserialize() {
        records.push(rec?);
    }
    Ok(records)
}

/// Flattens reports into the records a CSV file holds.
pub fn records(reports: &[ConvergenceReport]) -> Vec<CsvRecord> {
    reports
        .iter()
        .flat_map(|r| {
            r.rows.iter().map(move |row: &Row| CsvRecord {
                alpha: r.alpha,
                n: row.n,
                e_inf: row.e_inf,
                rate: row.rate,
            })
        })
        .collect()
}

pub fn save(reports: &[ConvergenceReport], path: &Path) -> anyhow::Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let w = std::io::BufWriter::new(file);
    match Format::from_path(path)? {
        Format::Json => write_json(reports, w),
        Format::Csv => write_csv(reports, w),
    }
}

/// Plain-text table for the terminal.
pub fn render_table(report: &ConvergenceReport) -> String {
    let mut s = format!(
        "{}  kernel {}  alpha {}  gamma {}\n{:>8}  {:>14}  {:>9}\n",
        report.experiment, report.kernel, report.alpha, report.gamma, "N", "E_inf", "rate"
    );
    for row in &report.rows {
        let e = match (&row.e_inf, &row.error) {
            (Some(e), _) => format!("{e:.4e}"),
            (None, Some(msg)) => format!("error: {msg}"),
            (None, None) => "-".into(),
        };
        let r = row.rate.map_or_else(|| "-".into(), |r| format!("{r:.4}"));
        s.push_str(&format!("{:>8}  {:>14}  {:>9}\n", row.n, e, r));
    }
    s
}
