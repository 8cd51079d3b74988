//! CSV and JSON reports of error-rate estimates.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ErrorRates;

pub const CSV_HEADER: &str =
    "scenario,axis_value,detector,attack,pfa,pfa_lo,pfa_hi,pmd,pmd_lo,pmd_hi,trials_h0,trials_h1,zero_event";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::param("format", format!("expected `csv` or `json`, got `{other}`"))),
        }
    }
}

/// Round to 6 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

/// One report line, with every rate already rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub axis_value: Option<f64>,
    pub detector: String,
    pub attack: String,
    pub pfa: f64,
    pub pfa_lo: f64,
    pub pfa_hi: f64,
    pub pmd: f64,
    pub pmd_lo: f64,
    pub pmd_hi: f64,
    pub trials_h0: u64,
    pub trials_h1: u64,
    pub zero_event: bool,
}

impl From<&ErrorRates> for ReportRow {
    fn from(r: &ErrorRates) -> Self {
        ReportRow {
            scenario: r.scenario.clone(),
            axis_value: r.axis_value.map(round_sig),
            detector: r.detector.clone(),
            attack: r.attack.clone(),
            pfa: round_sig(r.pfa.estimate),
            pfa_lo: round_sig(r.pfa.ci_low),
            pfa_hi: round_sig(r.pfa.ci_high),
            pmd: round_sig(r.pmd.estimate),
            pmd_lo: round_sig(r.pmd.ci_low),
            pmd_hi: round_sig(r.pmd.ci_high),
            trials_h0: r.trials_h0(),
            trials_h1: r.trials_h1(),
            zero_event: r.zero_event(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(r: &ReportRow) -> String {
    let axis = r.axis_value.map(|v| v.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        csv_field(&r.scenario),
        axis,
        csv_field(&r.detector),
        csv_field(&r.attack),
        r.pfa,
        r.pfa_lo,
        r.pfa_hi,
        r.pmd,
        r.pmd_lo,
        r.pmd_hi,
        r.trials_h0,
        r.trials_h1,
        r.zero_event
    )
}

/// Render `results` in `format`, rows in the order given.
pub fn emit_report(results: &[ErrorRates], format: Format) -> Result<String> {
    if results.is_empty() {
        return Err(Error::param("results", "nothing to report"));
    }
    let rows: Vec<ReportRow> = results.iter().map(ReportRow::from).collect();
    Ok(render_rows(&rows, format))
}

pub fn render_rows(rows: &[ReportRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&csv_line(r));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

/// Parse a CSV report produced by [`emit_report`].
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::param("report", "missing or unexpected CSV header"));
    }
    let bad = |n: usize, what: &str| Error::param("report", format!("row {n}: bad {what}"));
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, line)| {
            let f = split_csv(line);
            if f.len() != 13 {
                return Err(bad(n, "field count"));
            }
            let num = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(n, what));
            let int = |i: usize, what: &str| f[i].parse::<u64>().map_err(|_| bad(n, what));
            Ok(ReportRow {
                scenario: f[0].clone(),
                axis_value: if f[1].is_empty() { None } else { Some(num(1, "axis_value")?) },
                detector: f[2].clone(),
                attack: f[3].clone(),
                pfa: num(4, "pfa")?,
                pfa_lo: num(5, "pfa_lo")?,
                pfa_hi: num(6, "pfa_hi")?,
                pmd: num(7, "pmd")?,
                pmd_lo: num(8, "pmd_lo")?,
                pmd_hi: num(9, "pmd_hi")?,
                trials_h0: int(10, "trials_h0")?,
                trials_h1: int(11, "trials_h1")?,
                zero_event: f[12].parse().map_err(|_| bad(n, "zero_event"))?,
            })
        })
        .collect()
}

/// Write `document` to `path`.
pub fn write_report(document: &str, path: &Path) -> Result<()> {
    std::fs::write(path, document).map_err(|e| Error::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Calibration;
    use crate::stats::RateEstimate;

    fn rates(md: u64) -> ErrorRates {
        ErrorRates {
            scenario: "table2/alpha=1/N=1/LLR".into(),
            axis_value: Some(3.0),
            detector: "LLR".into(),
            attack: "llr".into(),
            pfa: RateEstimate::from_counts(987, 10_000_000),
            pmd: RateEstimate::from_counts(md, 1_000_000),
            calibration: Calibration::Llr {
                mode: crate::experiments::LlrCalibration::Analytic,
                theta: Some(18.42),
            },
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.123_456_789), 0.123_457);
        assert_eq!(round_sig(9.876_543_21e-7), 9.876_54e-7);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn single_result_has_two_lines() {
        let doc = emit_report(&[rates(240_000)], Format::Csv).unwrap();
        let lines: Vec<&str> = doc.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("table2/alpha=1/N=1/LLR,3,LLR,llr,0.0000987,"));
        assert!(lines[1].ends_with(",10000000,1000000,false"));
        assert!(emit_report(&[], Format::Csv).is_err());
    }

    #[test]
    fn zero_event_row() {
        let doc = emit_report(&[rates(0)], Format::Csv).unwrap();
        let row = &parse_csv(&doc).unwrap()[0];
        assert!(row.zero_event);
        assert_eq!(row.pmd, 1e-6);
        assert_eq!(row.pmd_lo, 0.0);
        assert!(row.pmd_hi >= row.pmd);
    }

    #[test]
    fn csv_to_json_roundtrip() {
        let results = [rates(240_000), rates(0)];
        let csv = emit_report(&results, Format::Csv).unwrap();
        let json = emit_report(&results, Format::Json).unwrap();
        let rows = parse_csv(&csv).unwrap();
        assert_eq!(render_rows(&rows, Format::Json), json);
        let back: Vec<ReportRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn quoting() {
        assert_eq!(split_csv("a,\"b,c\",\"d\"\"e\""), vec!["a", "b,c", "d\"e"]);
    }

    #[test]
    fn unwritable_path() {
        let err = write_report("x", Path::new("/nonexistent-dir/report.csv")).unwrap_err();
        assert!(matches!(err, Error::Output { .. }));
    }
}
