use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};

use super::batch::BatchSummary;
use super::trial::TrialMetrics;
use crate::error::BenchError;

pub const RAW_HEADER: &str = "algorithm,scenario,seed,success,coll_checks,nn_lookups,sim_time_s,wall_time_s";
pub const SUMMARY_HEADER: &str = "algorithm,scenario,runs,success_pct,coll_checks,nn_lookups,sim_time_s,wall_time_s";

fn write_rows<T: serde::Serialize, W: Write>(rows: &[T], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn read_rows<T: serde::de::DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(BenchError::from)
}

/// Writes one row per trial under [`RAW_HEADER`].
pub fn write_raw<W: Write>(trials: &[TrialMetrics], out: W) -> Result<(), BenchError> {
    write_rows(trials, out)
}

pub fn read_raw<R: Read>(input: R) -> Result<Vec<TrialMetrics>, BenchError> {
    read_rows(input)
}

/// Writes one row per summary under [`SUMMARY_HEADER`].
pub fn write_summaries<W: Write>(summaries: &[BatchSummary], out: W) -> Result<(), BenchError> {
    write_rows(summaries, out)
}

pub fn read_summaries<R: Read>(input: R) -> Result<Vec<BatchSummary>, BenchError> {
    read_rows(input)
}

/// Reads a raw CSV file.
pub fn read_raw_file(path: &std::path::Path) -> Result<Vec<TrialMetrics>, BenchError> {
    let f = File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_raw(f)
}

/// Human-readable results table.
pub fn format_table(summaries: &[BatchSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>9} {:>14} {:>14} {:>10}",
        "Algorithm", "Success %", "Coll. Checks", "Nearest Neigh.", "Time (s)"
    );
    for b in summaries {
        let _ = writeln!(
            s,
            "{:<12} {:>9.0} {:>14.0} {:>14.0} {:>10.2}",
            b.algorithm.display_name(),
            b.success_pct,
            b.collision_checks,
            b.nn_lookups,
            b.sim_time_s
        );
    }
    s
}
