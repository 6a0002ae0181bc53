//! Record and summary tables as CSV or JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use hhfd::experiment::{ExperimentReport, RunRecord};
use hhfd::solver::SolverMethod;
use serde::Serialize;

use crate::error::{CliError, Result};

/// One repeat. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordRow {
    pub run_id: usize,
    pub seed: u64,
    pub problem: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_b")]
    pub n_b: usize,
    #[serde(rename = "K")]
    pub k: u64,
    pub c: f64,
    pub beta: f64,
    pub theta: f64,
    pub lambda: Option<f64>,
    #[serde(rename = "M")]
    pub m: usize,
    pub arep_percent: Option<f64>,
    pub solver: String,
    pub iterations: usize,
    pub residual: Option<f64>,
    pub status: String,
    pub wall_ms: f64,
}

/// Five-number AREP summary for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_b")]
    pub n_b: usize,
    #[serde(rename = "K")]
    pub k: u64,
    pub c: f64,
    pub beta: f64,
    pub theta: f64,
    pub runs: usize,
    pub failed: usize,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
}

pub const RECORD_HEADER: &str =
    "run_id,seed,problem,d,N,N_b,K,c,beta,theta,lambda,M,arep_percent,solver,iterations,residual,status,wall_ms";

fn record_row(run_id: usize, report: &ExperimentReport, r: &RunRecord, solver: SolverMethod) -> RecordRow {
    RecordRow {
        run_id,
        seed: r.seed,
        problem: report.problem.clone(),
        d: report.dimension,
        n: r.interior,
        n_b: r.boundary,
        k: r.truncation,
        c: r.shift,
        beta: r.smoothing,
        theta: r.theta,
        lambda: r.lambda,
        m: r.basis_size,
        arep_percent: r.arep_percent,
        solver: solver.to_string(),
        iterations: r.iterations,
        residual: r.residual,
        status: r.status.to_string(),
        wall_ms: (r.wall_ms * 1e3).round() / 1e3,
    }
}

/// Appends the rows for one report, numbering runs from `first_id`.
pub fn rows(report: &ExperimentReport, first_id: usize) -> (Vec<RecordRow>, SummaryRow) {
    let solver = report.config.solver.method;
    let records: Vec<RecordRow> = report
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| record_row(first_id + i, report, r, solver))
        .collect();
    let s = &report.summary;
    let five = s.arep;
    let first = &report.records[0];
    let summary = SummaryRow {
        problem: report.problem.clone(),
        d: report.dimension,
        n: report.config.interior,
        n_b: first.boundary,
        k: report.config.method.truncation,
        c: report.config.method.shift,
        beta: report.config.method.smoothing,
        theta: report.config.method.theta,
        runs: s.runs,
        failed: s.failed,
        min: five.map(|f| f.min),
        q1: five.map(|f| f.q1),
        median: five.map(|f| f.median),
        q3: five.map(|f| f.q3),
        max: five.map(|f| f.max),
    };
    (records, summary)
}

fn csv_error(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("<output>", io),
        other => CliError::io("<output>", std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(header).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

pub fn write_records_csv<W: Write>(out: W, rows: &[RecordRow]) -> Result<()> {
    let header: Vec<&str> = RECORD_HEADER.split(',').collect();
    write_csv(out, rows, &header)
}

pub fn write_summaries_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    write_csv(
        out,
        rows,
        &[
            "problem", "d", "N", "N_b", "K", "c", "beta", "theta", "runs", "failed", "min", "q1", "median", "q3",
            "max",
        ],
    )
}

#[derive(Serialize)]
struct Document<'a> {
    records: &'a [RecordRow],
    summaries: &'a [SummaryRow],
}

pub fn write_json<W: Write>(out: W, records: &[RecordRow], summaries: &[SummaryRow]) -> Result<()> {
    serde_json::to_writer_pretty(out, &Document { records, summaries })
        .map_err(|e| CliError::io("<output>", e.into()))
}

/// `runs.csv` -> `runs_summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_summary.{}", ext.to_string_lossy()),
        None => format!("{stem}_summary"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_sibling() {
        assert_eq!(summary_path(Path::new("out/runs.csv")), PathBuf::from("out/runs_summary.csv"));
        assert_eq!(summary_path(Path::new("runs")), PathBuf::from("runs_summary"));
    }

    #[test]
    fn empty_optionals_are_blank() {
        let row = RecordRow {
            run_id: 0,
            seed: 1,
            problem: "case1".into(),
            d: 2,
            n: 10,
            n_b: 4,
            k: 4,
            c: 1.0,
            beta: 0.0,
            theta: 2.0,
            lambda: None,
            m: 5,
            arep_percent: None,
            solver: "bicgstab".into(),
            iterations: 0,
            residual: None,
            status: "insufficient_nodes".into(),
            wall_ms: 1.5,
        };
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RECORD_HEADER);
        assert_eq!(lines.next().unwrap(), "0,1,case1,2,10,4,4,1.0,0.0,2.0,,5,,bicgstab,0,,insufficient_nodes,1.5");
    }
}
