use anyhow::{Context, Result};
use cspdd::Error;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Cap,
    Timeout,
}

impl Status {
    /// Status of a run that stopped with `e`. Errors that are neither
    /// infeasibility nor a time limit count as hitting a cap; the message
    /// goes to the note column.
    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::NoFeasiblePath | Error::Infeasible => Status::Infeasible,
            Error::TimeLimit => Status::Timeout,
            _ => Status::Cap,
        }
    }
}

/// One CSV row: an instance solved by one method. `objective` is set iff
/// the status is optimal. `iterations` is branch-and-bound nodes for ddr,
/// augmentation rounds for ddro and ip, and empty for brute force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub method: String,
    pub status: Status,
    pub objective: Option<f64>,
    pub time_s: f64,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub note: String,
}

impl RunRecord {
    pub fn failed(instance: &str, method: &str, seed: Option<u64>, time_s: f64, e: &Error) -> Self {
        RunRecord {
            instance: instance.to_string(),
            method: method.to_string(),
            status: Status::of_error(e),
            objective: None,
            time_s,
            iterations: None,
            seed,
            note: e.to_string(),
        }
    }
}

pub fn write_records<W: Write>(sink: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const HEADER: [&str; 8] = ["instance", "method", "status", "objective", "time_s", "iterations", "seed", "note"];

/// Appends one row, writing the header first when the file is new or empty.
pub fn append_record(path: &Path, record: &RunRecord) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(HEADER)?;
    }
    w.serialize(record)?;
    w.flush()?;
    Ok(())
}
