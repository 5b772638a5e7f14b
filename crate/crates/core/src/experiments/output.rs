//! CSV and JSON emitters. Files are written to a temporary sibling and
//! renamed into place, so a failed run never leaves a partial file.

use super::{MCSummary, Scenario};
use crate::error::{Error, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), reason: e.to_string() }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(rows).map_err(|e| Error::Parse(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn encode<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Writes `rows` to `dir/stem.{csv,json}` and returns the path.
pub fn write_rows<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: Format) -> Result<std::path::PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    write_atomic(&path, &encode(rows, format)?)?;
    Ok(path)
}

/// One flat `summary` record: scenario fields followed by the estimates and
/// their standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRecord {
    pub estimator: String,
    pub network: String,
    pub method: &'static str,
    pub n: usize,
    pub theta: f64,
    pub eta: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub replicates: u64,
    pub seed: u64,
    pub mean_theta: f64,
    pub mean_eta: f64,
    pub mean_nu: f64,
    pub se_mean_theta: f64,
    pub se_mean_eta: f64,
    pub se_mean_nu: f64,
    pub var_theta: f64,
    pub var_eta: f64,
    pub var_nu: f64,
    pub se_var_theta: f64,
    pub se_var_eta: f64,
    pub se_var_nu: f64,
    pub mse_theta: f64,
    pub mse_eta: f64,
    pub mse_nu: f64,
    pub se_mse_theta: f64,
    pub se_mse_eta: f64,
    pub se_mse_nu: f64,
    pub total_mse: f64,
    pub se_total_mse: f64,
}

impl SummaryRecord {
    pub fn new(sc: &Scenario, s: &MCSummary) -> Self {
        Self {
            estimator: sc.estimator.label(),
            network: sc.network.label(),
            method: s.method,
            n: sc.n,
            theta: sc.params.theta,
            eta: sc.params.eta,
            nu: sc.params.nu,
            epsilon: sc.noise.epsilon,
            replicates: sc.replicates,
            seed: sc.seed,
            mean_theta: s.mean[0],
            mean_eta: s.mean[1],
            mean_nu: s.mean[2],
            se_mean_theta: s.se_mean[0],
            se_mean_eta: s.se_mean[1],
            se_mean_nu: s.se_mean[2],
            var_theta: s.var[0],
            var_eta: s.var[1],
            var_nu: s.var[2],
            se_var_theta: s.se_var[0],
            se_var_eta: s.se_var[1],
            se_var_nu: s.se_var[2],
            mse_theta: s.mse[0],
            mse_eta: s.mse[1],
            mse_nu: s.mse[2],
            se_mse_theta: s.se_mse[0],
            se_mse_eta: s.se_mse[1],
            se_mse_nu: s.se_mse[2],
            total_mse: s.total_mse,
            se_total_mse: s.se_total_mse,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: &'static str,
    }

    #[test]
    fn csv_has_header_and_dot_decimals() {
        let bytes = to_csv(&[Row { a: 0.1, b: "x" }, Row { a: -2.5e-7, b: "y" }]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n0.1,x\n-2.5e-7,y\n");
    }

    #[test]
    fn json_mirrors_field_names() {
        let bytes = to_json(&[Row { a: 1.0, b: "x" }]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v[0]["a"], 1.0);
        assert_eq!(v[0]["b"], "x");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
