//! CSV and JSON artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tsdf_mcl::parallel::BenchmarkRecord;

use crate::error::Result;
use crate::experiment::MetricsRecord;

pub const TRANSLATION_ERROR_CSV: &str = "translation_error.csv";
pub const RUNTIME_SCALING_CSV: &str = "runtime_scaling.csv";
pub const BENCH_JSONL: &str = "bench.jsonl";

#[derive(Serialize)]
struct ErrorRow {
    iteration: usize,
    ex: f64,
    ey: f64,
    ez: f64,
}

#[derive(Serialize)]
struct ScalingRow {
    n: usize,
    median_ms: f64,
}

// serde writes no header for an empty stream, so headers are written by hand
fn write_rows<W: Write, R: Serialize>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration,ex,ey,ez` rows. Floats use the shortest round-trip representation.
pub fn write_translation_error_csv<W: Write>(out: W, metrics: &[MetricsRecord]) -> Result<()> {
    write_rows(
        out,
        &["iteration", "ex", "ey", "ez"],
        metrics.iter().map(|m| ErrorRow {
            iteration: m.iteration,
            ex: m.error_x,
            ey: m.error_y,
            ez: m.error_z,
        }),
    )
}

pub fn write_runtime_scaling_csv<W: Write>(out: W, series: &[(usize, f64)]) -> Result<()> {
    write_rows(
        out,
        &["n", "median_ms"],
        series
            .iter()
            .map(|&(n, median_ms)| ScalingRow { n, median_ms }),
    )
}

/// Writes both figure CSVs into `dir` and returns their paths.
pub fn emit_plots_csv(
    dir: &Path,
    metrics: &[MetricsRecord],
    scaling: &[(usize, f64)],
) -> Result<[PathBuf; 2]> {
    fs::create_dir_all(dir)?;
    let a = dir.join(TRANSLATION_ERROR_CSV);
    let b = dir.join(RUNTIME_SCALING_CSV);
    write_translation_error_csv(fs::File::create(&a)?, metrics)?;
    write_runtime_scaling_csv(fs::File::create(&b)?, scaling)?;
    Ok([a, b])
}

pub fn write_bench_jsonl<W: Write>(mut out: W, records: &[BenchmarkRecord]) -> Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Parses `translation_error.csv` back into `(iteration, ex, ey, ez)` tuples.
pub fn read_translation_error_csv(text: &str) -> Result<Vec<(usize, f64, f64, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
