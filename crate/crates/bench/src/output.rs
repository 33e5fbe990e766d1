//! Trace CSV files and JSON summaries.

use std::io::{Read, Write};
use std::path::Path;

use papa_core::certify::{BoundInputs, BoundReport, Theorem};
use papa_core::papa::TraceRecord;
use papa_core::problems::InstanceSpec;
use serde::{Deserialize, Serialize};

use crate::instance::{relative_residual, ReferenceKind};
use crate::BenchError;

/// One CSV row. The column order is part of the file format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub objective: f64,
    pub rel_obj_residual: f64,
    pub feasibility: f64,
    pub rho: f64,
    pub tau: f64,
    pub wall_ms: f64,
    pub dist_k: f64,
}

pub const CSV_HEADER: &str = "k,objective,rel_obj_residual,feasibility,rho,tau,wall_ms,dist_k";

pub fn rows(records: &[TraceRecord], f_star: f64) -> Vec<TraceRow> {
    records
        .iter()
        .map(|r| TraceRow {
            k: r.k,
            objective: r.objective,
            rel_obj_residual: relative_residual(r.objective, f_star),
            feasibility: r.feasibility,
            rho: r.rho,
            tau: r.tau,
            wall_ms: r.wall_ms,
            dist_k: r.dist,
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[TraceRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::Csv(e.into()))?;
    Ok(())
}

pub fn csv_bytes(rows: &[TraceRow]) -> Result<Vec<u8>, BenchError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(buf)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRow>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let got: Vec<&str> = headers.iter().collect();
    let want: Vec<&str> = CSV_HEADER.split(',').collect();
    if got != want {
        return Err(BenchError::Config(format!("unexpected trace columns {got:?}, expected {want:?}")));
    }
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

pub fn read_csv_path(path: &Path) -> Result<Vec<TraceRow>, BenchError> {
    let f = std::fs::File::open(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
    read_csv(f)
}

/// Back to solver records (`psi` is recomputed as `½ dist²`).
pub fn to_records(rows: &[TraceRow]) -> Vec<TraceRecord> {
    rows.iter()
        .map(|r| TraceRecord {
            k: r.k,
            objective: r.objective,
            dist: r.dist_k,
            feasibility: r.feasibility,
            psi: 0.5 * r.dist_k * r.dist_k,
            rho: r.rho,
            tau: r.tau,
            wall_ms: r.wall_ms,
        })
        .collect()
}

/// Everything `check` needs to re-certify a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleFile {
    pub f_star: f64,
    #[serde(default)]
    pub f_star_err: f64,
    pub inputs: BoundInputs,
    /// The family the run was configured for, if any.
    #[serde(default)]
    pub theorem: Option<Theorem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub window: (usize, usize),
    /// Fitted slope of `log rel_obj_residual` against `log k`.
    pub objective_slope: Option<f64>,
    /// Same for `dist_k`.
    pub feasibility_slope: Option<f64>,
    pub bound_violations: Option<usize>,
    pub worst_slack: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BoundOutcome {
    NotRequested,
    Skipped { reason: String },
    Checked { report: BoundReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub name: String,
    pub method: String,
    pub trace_file: String,
    pub iterations: usize,
    pub final_objective: f64,
    pub final_rel_obj_residual: f64,
    pub best_rel_obj_residual: f64,
    pub final_feasibility: f64,
    pub final_dist: f64,
    /// First iteration with relative residual below 1e-8.
    pub hit_1e_8: Option<usize>,
    pub restarts: usize,
    pub rate: RateReport,
    pub bounds: BoundOutcome,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub kind: ReferenceKind,
    pub f_star: f64,
    pub f_star_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub benchmark: InstanceSpec,
    pub budget: usize,
    pub reference: ReferenceSummary,
    pub solvers: Vec<SolverSummary>,
}

pub fn summary_json(s: &Summary) -> Result<String, BenchError> {
    let mut text = serde_json::to_string_pretty(s).map_err(|e| BenchError::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<TraceRow> {
        vec![
            TraceRow {
                k: 0,
                objective: 1.5,
                rel_obj_residual: 0.25,
                feasibility: 0.0,
                rho: 1.0,
                tau: 1.0,
                wall_ms: 0.0,
                dist_k: 3.0e-17,
            },
            TraceRow {
                k: 1,
                objective: -2.0e-300,
                rel_obj_residual: 1.0 / 3.0,
                feasibility: 1e-9,
                rho: 2.0,
                tau: 0.5,
                wall_ms: 0.0,
                dist_k: 0.1,
            },
        ]
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = sample();
        let bytes = csv_bytes(&rows).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
        assert!(!text.contains('\r'));
        assert_eq!(read_csv(&bytes[..]).unwrap(), rows);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = "k,objective\n0,1\n";
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
