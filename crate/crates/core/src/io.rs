//! CSV and JSON formats for paths, variations and estimates.
//!
//! CSV files are comma separated with a mandatory header and LF line endings;
//! numbers use Rust's shortest round-trip formatting. Every file is written to
//! a temporary sibling and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::HEstimate;
use crate::simulator::SamplePath;

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serialize rows of string fields under `header`.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// `t,y` rows for a path.
pub fn path_csv(path: &SamplePath) -> Result<Vec<u8>> {
    csv_bytes(
        &["t", "y"],
        path.values.iter().enumerate().map(|(k, y)| vec![path.t(k).to_string(), y.to_string()]),
    )
}

/// Sidecar file name: `path.csv` → `path.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write the path CSV and its provenance sidecar.
pub fn write_path(file: &Path, path: &SamplePath) -> Result<()> {
    write_atomic(file, &path_csv(path)?)?;
    write_atomic(&sidecar(file), &json_bytes(&path.provenance)?)
}

/// Read a `t,y` CSV. Abscissae must form the grid `k/N`, `k = 0..=N`.
pub fn read_path_csv(file: &Path) -> Result<SamplePath> {
    let mut r = csv::Reader::from_path(file)?;
    let header = r.headers()?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "y" {
        return Err(Error::Parse(format!("expected header `t,y`, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", line + 2)))
        };
        ts.push(parse(&rec[0])?);
        ys.push(parse(&rec[1])?);
    }
    if ts.len() < 2 {
        return Err(Error::Parse("a path needs at least two rows".into()));
    }
    let n = ts.len() - 1;
    for (k, &t) in ts.iter().enumerate() {
        if (t - k as f64 / n as f64).abs() > 1e-9 {
            return Err(Error::Parse(format!("row {}: t = {t} is not on the grid k/{n}", k + 2)));
        }
    }
    let mut path = SamplePath::new(ys)?;
    let side = sidecar(file);
    if side.exists() {
        let text = fs::read_to_string(&side)?;
        path.provenance = serde_json::from_str(&text).ok().flatten();
    }
    Ok(path)
}

/// `k,d,abs_d_beta` rows.
pub fn variations_csv(indices: &[usize], d: &[f64], beta: f64) -> Result<Vec<u8>> {
    csv_bytes(
        &["k", "d", "abs_d_beta"],
        indices
            .iter()
            .zip(d)
            .map(|(k, d)| vec![k.to_string(), d.to_string(), d.abs().powf(beta).to_string()]),
    )
}

/// `t,h` rows at the knots of an estimate.
pub fn hestimate_csv(est: &HEstimate) -> Result<Vec<u8>> {
    csv_bytes(
        &["t", "h"],
        est.knots_t
            .iter()
            .zip(&est.knots_h)
            .map(|(t, h)| vec![t.to_string(), h.to_string()]),
    )
}

/// Write the knot CSV and the full JSON record next to it.
pub fn write_hestimate(file: &Path, est: &HEstimate) -> Result<()> {
    write_atomic(file, &hestimate_csv(est)?)?;
    write_atomic(&sidecar(file), &json_bytes(est)?)
}
