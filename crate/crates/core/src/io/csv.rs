//! Series CSV with 17 significant digits, so every value parses back bitwise.

use crate::error::{Error, Result};
use crate::norms::NormReport;
use std::fmt::Write as _;
use std::path::Path;

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_to_string(report: &NormReport) -> String {
    let mut out = report.columns().join(",");
    out.push('\n');
    for row in report.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// `write_series`: header row plus one line per sample.
pub fn write_series(report: &NormReport, path: &Path) -> Result<()> {
    std::fs::write(path, series_to_string(report))?;
    Ok(())
}

pub fn parse_series(text: &str) -> Result<NormReport> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parameter("series file has no header".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let mut report = NormReport::new(&columns);
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parameter(format!("series line {}: {e}", n + 2)))?;
        report.push(row)?;
    }
    Ok(report)
}

pub fn read_series(path: &Path) -> Result<NormReport> {
    parse_series(&std::fs::read_to_string(path)?)
}

/// Plain table of already formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = NormReport::new(&["t", "h1_norm", "dissipation", "cum_dissipation"]);
        assert_eq!(
            series_to_string(&r),
            "t,h1_norm,dissipation,cum_dissipation\n"
        );
    }

    #[test]
    fn values_round_trip_bitwise() {
        let mut r = NormReport::new(&["t", "a", "b"]);
        let awkward = [
            0.1,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            1e300,
            -2.5e-17,
            f64::EPSILON,
            0.0,
        ];
        for (i, v) in awkward.iter().enumerate() {
            r.push(vec![i as f64 * 0.1, *v, v.sqrt().max(-1.0)])
                .unwrap();
        }
        r.push(vec![10.0, -0.0, std::f64::consts::PI]).unwrap();
        r.push(vec![11.0, 5e-324, 1.7976931348623157e308]).unwrap();
        let text = series_to_string(&r);
        assert_eq!(text.lines().count(), r.len() + 1);
        let back = parse_series(&text).unwrap();
        assert_eq!(back.columns(), r.columns());
        for (a, b) in back.rows().iter().zip(r.rows()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
