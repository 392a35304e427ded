//! Reading samples and curve files.

use std::fs;
use std::path::Path;

use evcop_core::{BivariateSample, EstimateCurve, MarginMode};
use serde_json::Value;

use crate::error::{io, usage, CliResult};

/// Two numeric columns read from CSV text.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub header: Option<Vec<String>>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Comma-separated values with an optional single header row, detected by
/// a non-numeric entry in either of the first two fields. Only the first
/// two columns are used.
pub fn parse_csv(text: &str, source: &str) -> CliResult<Columns> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| io(format!("{source}: malformed CSV: {e}")))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() < 2 {
            return Err(io(format!(
                "{source}: line {} has {} field(s); at least two numeric columns are required",
                i + 1,
                rec.len()
            )));
        }
        match (parse_field(&rec[0]), parse_field(&rec[1])) {
            (Some(a), Some(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if i == 0 => header = Some(rec.iter().map(str::to_string).collect()),
            _ => {
                return Err(io(format!(
                    "{source}: line {} is not numeric: {:?}",
                    i + 1,
                    rec.iter().take(2).collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(Columns { header, x, y })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io(format!("cannot read {}: {e}", path.display())))
}

/// Loads a bivariate sample. Constant columns are rejected, since every
/// rank-based quantity is undefined on them.
pub fn read_sample(path: &Path, mode: MarginMode) -> CliResult<BivariateSample> {
    let cols = parse_csv(&read_text(path)?, &path.display().to_string())?;
    let n = cols.x.len();
    if n < 2 {
        return Err(usage(format!("{}: need at least 2 observations, got {n}", path.display())));
    }
    for (name, c) in [("first", &cols.x), ("second", &cols.y)] {
        if c.iter().all(|v| *v == c[0]) {
            return Err(usage(format!(
                "{}: the {name} column is constant (all ties)",
                path.display()
            )));
        }
    }
    Ok(BivariateSample::new(cols.x, cols.y, mode)?)
}

/// Reads a curve from either a bare curve object or an `estimate` result
/// document.
pub fn read_curve(path: &Path) -> CliResult<EstimateCurve> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: not a JSON curve file: {e}", path.display())))?;
    let curve = match v.pointer("/result/curve") {
        Some(c) => c.clone(),
        None => v,
    };
    serde_json::from_value(curve)
        .map_err(|e| usage(format!("{}: not a curve: {e}", path.display())))
}
