//! Series, point-list and grid files.
//!
//! Series come as CSV (`re,im` per row, optional header) or JSON
//! (`{"sigma": s, "dt": d, "samples": [[re, im], ...]}`). Point lists are
//! plain text with `re im` per line; `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ptransform::{Complex64, SignalSeries};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SeriesFormat {
    Csv,
    Json,
}

impl SeriesFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => SeriesFormat::Json,
            _ => SeriesFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDocument {
    #[serde(default)]
    sigma: f64,
    #[serde(default = "unit_dt")]
    dt: f64,
    samples: Vec<[f64; 2]>,
}

fn unit_dt() -> f64 {
    1.0
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_series(path: &Path, format: Option<SeriesFormat>) -> CliResult<SignalSeries> {
    let text = read_text(path)?;
    let parsed = match format.unwrap_or_else(|| SeriesFormat::from_path(path)) {
        SeriesFormat::Csv => parse_series_csv(&text),
        SeriesFormat::Json => parse_series_json(&text),
    };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn write_series(path: &Path, series: &SignalSeries, format: SeriesFormat) -> CliResult<()> {
    let text = match format {
        SeriesFormat::Csv => series_to_csv(series),
        SeriesFormat::Json => series_to_json(series),
    };
    write_text(path, &text)
}

fn parse_field(tok: &str, row: usize, col: usize) -> Result<f64, String> {
    let v: f64 = tok.trim().parse().map_err(|_| format!("row {row}, column {col}: not a number: {:?}", tok.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("row {row}, column {col}: non-finite value"))
    }
}

/// Rows are 1-based in messages. The first row may be a header; it is
/// skipped when neither field parses as a number.
pub fn parse_series_csv(text: &str) -> Result<SignalSeries, String> {
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(format!("row {row}: expected 2 columns, found {}", fields.len()));
        }
        if samples.is_empty() && row == 1 && fields.iter().all(|f| f.trim().parse::<f64>().is_err()) {
            continue;
        }
        samples.push(Complex64::new(parse_field(fields[0], row, 1)?, parse_field(fields[1], row, 2)?));
    }
    if samples.is_empty() {
        return Err("no samples".into());
    }
    SignalSeries::new(samples, 0.0).map_err(|e| e.to_string())
}

pub fn parse_series_json(text: &str) -> Result<SignalSeries, String> {
    let doc: SeriesDocument =
        serde_json::from_str(text).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    if doc.samples.is_empty() {
        return Err("no samples".into());
    }
    let samples = doc.samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    SignalSeries::with_dt(samples, doc.sigma, doc.dt).map_err(|e| e.to_string())
}

/// 17 significant digits, enough to read back every `f64` exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_to_csv(series: &SignalSeries) -> String {
    let mut out = String::from("re,im\n");
    for z in series.samples() {
        let _ = writeln!(out, "{},{}", fmt17(z.re), fmt17(z.im));
    }
    out
}

pub fn series_to_json(series: &SignalSeries) -> String {
    let doc = SeriesDocument {
        sigma: series.sigma(),
        dt: series.dt(),
        samples: series.samples().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("series serializes") + "\n"
}

/// Parses whitespace-separated numbers, `width` per line.
fn parse_columns(text: &str, width: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != width {
            return Err(format!("line {}: expected {width} numbers, found {}", i + 1, fields.len()));
        }
        let row = fields
            .iter()
            .enumerate()
            .map(|(c, f)| parse_field(f, i + 1, c + 1).map_err(|e| e.replacen("row", "line", 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_points(text: &str) -> Result<Vec<Complex64>, String> {
    Ok(parse_columns(text, 2)?.into_iter().map(|r| Complex64::new(r[0], r[1])).collect())
}

pub fn read_points(path: &Path) -> CliResult<Vec<Complex64>> {
    let pts = parse_points(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if pts.is_empty() {
        return Err(usage(format!("{}: no points", path.display())));
    }
    Ok(pts)
}

pub fn points_to_text(points: &[Complex64]) -> String {
    let mut out = String::new();
    for z in points {
        let _ = writeln!(out, "{} {}", fmt17(z.re), fmt17(z.im));
    }
    out
}

/// Model files list one term per line as `c_re c_im xi_re xi_im`.
pub fn read_model(path: &Path) -> CliResult<ptransform::ExponentialModel> {
    let rows = parse_columns(&read_text(path)?, 4).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(usage(format!("{}: no terms", path.display())));
    }
    let terms = rows
        .iter()
        .map(|r| ptransform::Term::new(Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])))
        .collect();
    Ok(ptransform::ExponentialModel::from_terms_unmerged(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_examples() {
        let s = parse_series_csv("1,0\n0,1").unwrap();
        assert_eq!(s.samples(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let s = parse_series_csv("re,im\n1,2\n3,4\n").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn csv_errors_carry_row_numbers() {
        let err = parse_series_csv("1,0\n2,x\n").unwrap_err();
        assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
        let err = parse_series_csv("1,0\n2\n").unwrap_err();
        assert!(err.contains("row 2"), "{err}");
        assert_eq!(parse_series_csv("").unwrap_err(), "no samples");
        assert_eq!(parse_series_csv("re,im\n").unwrap_err(), "no samples");
    }

    #[test]
    fn json_sigma_is_read() {
        let s = parse_series_json(r#"{"sigma": 0.5, "dt": 0.25, "samples": [[1, 0], [0, 1]]}"#).unwrap();
        assert_eq!(s.sigma(), 0.5);
        assert_eq!(s.dt(), 0.25);
        assert_eq!(parse_series_json(r#"{"samples": []}"#).unwrap_err(), "no samples");
        let err = parse_series_json("{\n\"samples\": [[1, \"a\"]]}").unwrap_err();
        assert!(err.starts_with("line 2"), "{err}");
    }

    #[test]
    fn series_round_trips_bit_exactly() {
        let samples: Vec<Complex64> =
            (0..20).map(|k| Complex64::new((k as f64 * 0.37).sin() / 3.0, 1e-300 * k as f64 - 0.1)).collect();
        let s = SignalSeries::with_dt(samples, 0.125, 1e-3).unwrap();
        let back = parse_series_csv(&series_to_csv(&s)).unwrap();
        assert_eq!(back.samples(), s.samples());
        let back = parse_series_json(&series_to_json(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn points_parse_with_comments() {
        let pts = parse_points("# square\n0 0\n1 0 # corner\n\n1 1\n").unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(parse_points(&points_to_text(&pts)).unwrap(), pts);
        let err = parse_points("0 0\n1 q\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }
}
