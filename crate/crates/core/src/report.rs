//! Report files: JSON documents plus RFC-4180 CSV tables, written side by
//! side. Sparse vectors are embedded as JSON blobs inside CSV cells.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::extract::graph::ExtractionRecord;
use crate::smoothing::pipeline::PipelineReport;

fn io_err(e: std::io::Error) -> CoreError {
    CoreError::Domain {
        op: "report-io",
        detail: e.to_string(),
    }
}

fn csv_err(e: csv::Error) -> CoreError {
    CoreError::Domain {
        op: "report-csv",
        detail: e.to_string(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| CoreError::Domain {
        op: "report-json",
        detail: e.to_string(),
    })?;
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(json.as_bytes()).map_err(io_err)?;
    file.write_all(b"\n").map_err(io_err)?;
    Ok(())
}

/// Extraction records: one SparseVec JSON blob per vector cell.
pub fn write_extraction_csv(path: &Path, records: &[ExtractionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "sample_id",
        "input",
        "output",
        "displacement",
        "rho",
        "alpha",
        "roundtrip_error",
    ])
    .map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        let input = serde_json::to_string(&r.input).unwrap();
        let output = serde_json::to_string(&r.output).unwrap();
        w.write_record([
            i.to_string(),
            input,
            output,
            format!("{:.17e}", r.displacement),
            r.rho.map(|v| format!("{v:.17e}")).unwrap_or_default(),
            r.alpha.map(|v| format!("{v:.17e}")).unwrap_or_default(),
            format!("{:.17e}", r.roundtrip_error),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Pipeline table: sample_id, err, eps_budget, sigma_min, verdict.
pub fn write_pipeline_csv(path: &Path, report: &PipelineReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["sample_id", "err", "eps_budget", "sigma_min", "verdict"])
        .map_err(csv_err)?;
    for s in &report.samples {
        let verdict = serde_json::to_value(s.verdict)
            .unwrap()
            .as_str()
            .unwrap()
            .to_string();
        w.write_record([
            s.id.to_string(),
            format!("{:.17e}", s.err),
            format!("{:.17e}", s.eps),
            format!("{:.17e}", s.sigma_min),
            verdict,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Generic two-column-plus table for checks and demo trajectories.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::SparseVec;

    #[test]
    fn sparse_vec_json_schema() {
        let v = SparseVec::from_pairs(&[(3, 0.5), (1, -1.0)]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"entries":[[1,-1.0],[3,0.5]]}"#);
        let back: SparseVec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn extraction_csv_roundtrips_a_row() {
        let dir = std::env::temp_dir().join("smoothext-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("records.csv");
        let records = vec![ExtractionRecord {
            input: SparseVec::basis(1),
            output: SparseVec::basis(2),
            displacement: 0.5,
            rho: Some(0.25),
            alpha: None,
            roundtrip_error: 1e-12,
        }];
        write_extraction_csv(&path, &records).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.starts_with("sample_id,input,output"));
        // The JSON blob cell is quoted per RFC 4180 (it contains commas).
        assert!(content.contains("\"{\"\"entries\"\":[[1,1.0]]}\""));
    }
}
