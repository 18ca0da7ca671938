//! CSV output. Every file starts with a `# schema: <name>` line followed by
//! the header row.

use std::io::Write;

use serde::{Deserialize, Serialize};

pub const LEARN_SCHEMA: &str = "contractlab.learn.v1";
pub const GAP_SCHEMA: &str = "contractlab.gap.v1";
pub const MIXED_SCHEMA: &str = "contractlab.mixed.v1";
pub const TRACE_SCHEMA: &str = "contractlab.trace.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnRow {
    pub seed: u64,
    pub mode: String,
    pub eps: f64,
    pub delta: f64,
    pub h: f64,
    pub c: f64,
    pub queries: u64,
    pub init_queries: u64,
    pub iterations: usize,
    pub bound_exceeded: bool,
    pub est_utility: f64,
    pub true_utility: f64,
    pub opt_h_truth: f64,
    pub within_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub family: String,
    pub eps: f64,
    pub h: f64,
    pub n: usize,
    pub opt: f64,
    pub opt_h: f64,
    pub ratio: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedRow {
    pub source: String,
    pub seed: u64,
    pub eps: f64,
    pub opt: f64,
    pub lin: f64,
    pub bound: f64,
    pub holds: bool,
    /// Failed checks for this instance across the grid and corollary forms.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub query_index: u64,
    pub mode: String,
    pub descriptor: String,
    pub outcome: usize,
}

/// Row types with a fixed column list.
pub trait CsvRow: Serialize {
    const COLUMNS: &'static [&'static str];
}

impl CsvRow for LearnRow {
    const COLUMNS: &'static [&'static str] = &[
        "seed",
        "mode",
        "eps",
        "delta",
        "h",
        "c",
        "queries",
        "init_queries",
        "iterations",
        "bound_exceeded",
        "est_utility",
        "true_utility",
        "opt_h_truth",
        "within_eps",
    ];
}

impl CsvRow for GapRow {
    const COLUMNS: &'static [&'static str] = &["family", "eps", "h", "n", "opt", "opt_h", "ratio", "gap"];
}

impl CsvRow for MixedRow {
    const COLUMNS: &'static [&'static str] = &["source", "seed", "eps", "opt", "lin", "bound", "holds", "violations"];
}

impl CsvRow for TraceRow {
    const COLUMNS: &'static [&'static str] = &["query_index", "mode", "descriptor", "outcome"];
}

pub fn write_csv<W: Write, R: CsvRow>(mut out: W, schema: &str, rows: &[R]) -> csv::Result<()> {
    writeln!(out, "# schema: {schema}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRow>(schema: &str, rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, schema, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Reads a file written by [`write_csv`], checking the schema line.
pub fn read_csv<R: for<'de> Deserialize<'de>>(text: &str, schema: &str) -> Result<Vec<R>, String> {
    let (first, rest) = text.split_once('\n').ok_or("empty file")?;
    let got = first.strip_prefix("# schema: ").ok_or("missing schema line")?;
    if got.trim() != schema {
        return Err(format!("schema `{got}`, expected `{schema}`"));
    }
    csv::Reader::from_reader(rest.as_bytes()).deserialize().collect::<Result<_, _>>().map_err(|e| e.to_string())
}
