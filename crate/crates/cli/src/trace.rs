use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use mpbcfw::solver::TraceRecord;

/// Column order of CSV traces; JSON-lines traces use the same keys.
pub const COLUMNS: [&str; 13] = [
    "iter",
    "pass_kind",
    "exact_calls",
    "approx_calls",
    "elapsed_ms",
    "dual",
    "primal",
    "gap",
    "dual_avg",
    "primal_avg",
    "gap_avg",
    "mean_ws_size",
    "approx_passes_this_iter",
];

/// Missing values are empty fields.
pub fn write_csv(path: &Path, trace: &[TraceRecord]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(COLUMNS)?;
    for rec in trace {
        w.serialize(rec)?;
    }
    w.flush()
}

/// One JSON object per line; missing values are `null`.
pub fn write_json_lines(path: &Path, trace: &[TraceRecord]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for rec in trace {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
