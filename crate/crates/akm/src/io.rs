//! File formats: JSON configs and reports, CSV tables, raw field dumps.

use std::io::{self, BufRead, Read, Write};

use akm_core::sweep::SweepRow;
use akm_core::statistics::{AccuracyReport, OracleStatistics};
use akm_core::{MeasurementConfig, C64};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::grid::{ComplexField, GridSpec};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed field dump: {0}")]
    Malformed(String),
}

/// On-disk configuration. Omitted `b` and `t` take the model defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kappa: Option<f64>,
    pub delta_q: Option<f64>,
    pub b: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    pub t: Option<f64>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, IoError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(self, other: &ConfigFile) -> Self {
        Self {
            kappa: other.kappa.or(self.kappa),
            delta_q: other.delta_q.or(self.delta_q),
            b: other.b.or(self.b),
            m1: other.m1.or(self.m1),
            m2: other.m2.or(self.m2),
            m3: other.m3.or(self.m3),
            t: other.t.or(self.t),
        }
    }

    pub fn from_config(c: &MeasurementConfig) -> Self {
        Self {
            kappa: Some(c.kappa()),
            delta_q: Some(c.delta_q()),
            b: Some(c.b()),
            m1: Some(c.m1()),
            m2: Some(c.m2()),
            m3: Some(c.m3()),
            t: Some(c.t()),
        }
    }
}

/// Full-precision text form; round-trips every finite `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<W: Write, const N: usize>(
    out: W,
    header: &[&str; N],
    rows: impl IntoIterator<Item = [f64; N]>,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), IoError> {
    write_rows(out, &SweepRow::HEADER, rows.iter().map(SweepRow::values))
}

pub fn write_samples_csv<W: Write>(out: W, points: &[[f64; 2]]) -> Result<(), IoError> {
    write_rows(out, &["x1", "x2"], points.iter().copied())
}

pub fn write_wigner_csv<W: Write>(out: W, cells: &[[f64; 3]]) -> Result<(), IoError> {
    write_rows(out, &["x3", "p3", "W"], cells.iter().copied())
}

/// Header and numeric rows of a CSV produced by the writers above.
pub fn read_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| IoError::Malformed(format!("{s}: {e}"))))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Sidecar describing how a sample file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub config: ConfigFile,
    pub seed: u64,
    pub n: usize,
    pub generator: String,
}

impl SampleMetadata {
    pub fn new(config: &MeasurementConfig, seed: u64, n: usize) -> Self {
        Self {
            config: ConfigFile::from_config(config),
            seed,
            n,
            generator: "ChaCha20Rng::seed_from_u64 + StandardNormal, Cholesky factor".to_owned(),
        }
    }
}

/// `report` output: closed forms plus oracle values prefixed `oracle_`.
pub fn report_json(report: &AccuracyReport, oracle: &OracleStatistics) -> Result<Value, IoError> {
    let mut map = match serde_json::to_value(report)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Value::Object(o) = serde_json::to_value(oracle)? {
        for (k, v) in o {
            map.insert(format!("oracle_{k}"), v);
        }
    }
    Ok(Value::Object(map))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DumpHeader {
    format: String,
    n: usize,
    half_width: f64,
    order: String,
}

const DUMP_FORMAT: &str = "akm-field-v1";

/// One JSON header line, then `n^3` little-endian `(re, im)` f64 pairs,
/// x1 fastest.
pub fn write_field<W: Write>(mut out: W, field: &ComplexField) -> Result<(), IoError> {
    let header = DumpHeader {
        format: DUMP_FORMAT.to_owned(),
        n: field.grid.n(),
        half_width: field.grid.half_width(),
        order: "x1-fastest complex128-le".to_owned(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(16 * field.values.len());
    for z in &field.values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_field<R: BufRead>(mut input: R) -> Result<ComplexField, IoError> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader = serde_json::from_str(line.trim_end())?;
    if header.format != DUMP_FORMAT {
        return Err(IoError::Malformed(format!("unknown format {}", header.format)));
    }
    let grid = GridSpec::new(header.n, header.half_width).map_err(|e| IoError::Malformed(e.to_string()))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * grid.cell_count() {
        return Err(IoError::Malformed(format!("expected {} bytes, found {}", 16 * grid.cell_count(), bytes.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    Ok(ComplexField { values, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_rejects_unknown_fields() {
        assert!(ConfigFile::from_json(r#"{"kappa": 1.0, "gamma": 2.0}"#).is_err());
        let c = ConfigFile::from_json(r#"{"kappa": 1.0, "delta_q": 0.5}"#).unwrap();
        assert_eq!(c.kappa, Some(1.0));
        assert_eq!(c.b, None);
    }

    #[test]
    fn overlay_prefers_other() {
        let base = ConfigFile { kappa: Some(1.0), b: Some(3.0), ..Default::default() };
        let flags = ConfigFile { kappa: Some(2.0), ..Default::default() };
        let merged = base.overlay(&flags);
        assert_eq!(merged.kappa, Some(2.0));
        assert_eq!(merged.b, Some(3.0));
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1447.0 / 288.0, 1e-300, -2.5e17] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[[1.0 / 3.0, -2.0], [0.0, 7.5]]).unwrap();
        let (h, rows) = read_csv(&buf[..]).unwrap();
        assert_eq!(h, ["x1", "x2"]);
        assert_eq!(rows, vec![vec![1.0 / 3.0, -2.0], vec![0.0, 7.5]]);
    }
}
