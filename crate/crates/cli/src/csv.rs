//! Hand-written CSV emission with a fixed column order, so identical runs
//! produce byte-identical artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use kgossip::engine::RunTrace;

pub const TRACE_HEADER: &str =
    "round,progress,missing_total,groups,inter_group_edges,witness_size,color";
pub const SUMMARY_HEADER: &str = "n,k,seed,completion_round,timed_out,rounds_run,final_missing,\
red_rounds,green_rounds,blue_rounds,black_rounds,max_witness_size";

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let witness = r.witness_size.map(|w| w.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.round,
            r.progress,
            r.missing_total,
            r.groups,
            r.inter_group_edges,
            witness,
            r.color.as_str()
        )?;
    }
    Ok(())
}

pub struct SummaryRow {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub trace: RunTrace,
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in rows {
        let t = &row.trace;
        let [red, green, blue, black] = t.color_counts();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.n,
            row.k,
            row.seed,
            t.completion_round
                .map(|r| r.to_string())
                .unwrap_or_default(),
            t.completion_round.is_none(),
            t.records.len(),
            t.final_missing,
            red,
            green,
            blue,
            black,
            t.max_witness_size()
        )?;
    }
    Ok(())
}
