//! Trace files: a CSV with the columns of [`COLUMNS`](crate::trace::COLUMNS) and a `.meta`
//! sidecar in the config's `key = value` format.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{ExperimentConfig, GeneratedInstance, VERSION};
use crate::algorithms::RunOutput;
use crate::error::{Error, Result};

pub const META_SUFFIX: &str = "meta";

fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension(META_SUFFIX)
}

/// Writes the trace CSV and its sidecar; returns the sidecar path.
pub fn write_run(
    path: &Path,
    cfg: &ExperimentConfig,
    inst: &GeneratedInstance,
    out: &RunOutput,
    stride: usize,
) -> Result<PathBuf> {
    let file = BufWriter::new(File::create(path)?);
    out.trace.write_csv(file, stride)?;

    let meta = meta_path(path);
    let mut m = BufWriter::new(File::create(&meta)?);
    writeln!(m, "# config")?;
    m.write_all(cfg.to_text().as_bytes())?;
    writeln!(m, "# run")?;
    writeln!(m, "version = {VERSION}")?;
    writeln!(m, "label = {}", out.trace.algo)?;
    writeln!(m, "instance = {}", inst.description)?;
    writeln!(m, "stride = {}", stride.max(1))?;
    writeln!(m, "rows = {}", out.trace.records.len())?;
    writeln!(m, "stopped_early = {}", out.trace.stopped_early)?;
    if let Some(r) = out.trace.last() {
        writeln!(m, "final_iter = {}", r.iter)?;
        writeln!(m, "final_primal = {}", r.primal)?;
        writeln!(m, "final_gap = {}", r.gap_aligned)?;
        if let Some(g) = r.gap_hb {
            writeln!(m, "final_gap_hb = {g}")?;
        }
    }
    if let Some(v) = inst.instance.reference_value() {
        writeln!(m, "reference_value = {v}")?;
    }
    writeln!(m, "lmo_calls = {}", out.counts.lmo)?;
    writeln!(m, "grad_calls = {}", out.counts.grad)?;
    writeln!(m, "reporting_lmo = {}", out.counts.reporting_lmo)?;
    for (k, v) in &out.trace.notes {
        writeln!(m, "note.{k} = {v}")?;
    }
    m.flush()?;
    Ok(meta)
}

/// Reads the `# config` section of a sidecar back into a config.
pub fn read_meta(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let section: String = text
        .lines()
        .skip_while(|l| l.trim() != "# config")
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    ExperimentConfig::parse(&section)
}

/// `(iter, value)` pairs of one column; empty cells are skipped.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config("column", format!("no column `{name}`")))
    };
    let it = find("iter")?;
    let ic = find(column)?;
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = rec.get(ic).unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        let parse_err = || Error::Input(format!("row {}: cannot parse `{cell}`", row + 1));
        let t: usize = rec.get(it).unwrap_or("").parse().map_err(|_| parse_err())?;
        let v: f64 = cell.parse().map_err(|_| parse_err())?;
        out.push((t, v));
    }
    Ok(out)
}
