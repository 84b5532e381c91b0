//! CSV and JSON encodings of scan, classification and errata reports.
//!
//! CSV reals use 17 significant digits; JSON reals use the shortest
//! representation that parses back to the same `f64`. Both are exact round
//! trips.

use std::fmt::Display;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::characterize::{ClassifyReport, ErrataReport, ScanReport};
use crate::{Error, Result};

pub const SCAN_CSV_HEADER: [&str; 14] =
    ["identity", "dist", "k", "r", "m", "n", "p", "u", "s", "t", "v", "lhs", "rhs", "rel_residual"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::usage(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: Display>(x: Option<T>) -> String {
    x.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let io = |e: csv::Error| Error::usage(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::usage(format!("writing CSV: {e}")))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::usage(format!("writing JSON: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Parses any of the report types from JSON.
pub fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::usage(format!("reading JSON: {e}")))
}

pub fn serialize_report(report: &ScanReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(report),
        Format::Csv => {
            let p = &report.params;
            let rows = report.records.iter().map(|rec| {
                vec![
                    report.identity.to_string(),
                    report.dist.clone(),
                    opt(p.k),
                    opt(p.r),
                    opt(p.m),
                    opt(p.n),
                    opt(p.p),
                    real(rec.point.u),
                    opt_real(rec.point.s),
                    opt_real(rec.point.t),
                    real(rec.point.v),
                    real(rec.lhs),
                    real(rec.rhs),
                    real(rec.rel_residual),
                ]
            });
            csv_bytes(&SCAN_CSV_HEADER, rows)
        }
    }
}

pub fn serialize_classify(report: &ClassifyReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(report),
        Format::Csv => {
            let rows = report.checks.iter().map(|c| {
                vec![
                    report.dist.clone(),
                    c.identity.to_string(),
                    opt(c.params.k),
                    opt(c.params.r),
                    opt(c.params.m),
                    opt(c.params.n),
                    real(c.max_rel_residual),
                    c.verdict.to_string(),
                    report.classification.to_string(),
                ]
            });
            let header = ["dist", "identity", "k", "r", "m", "n", "max_rel_residual", "verdict", "classification"];
            csv_bytes(&header, rows)
        }
    }
}

pub fn serialize_errata(report: &ErrataReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(report),
        Format::Csv => {
            let rows = report.cells.iter().map(|c| {
                vec![
                    report.dist.clone(),
                    c.claim.token().to_string(),
                    c.k.to_string(),
                    c.r.to_string(),
                    c.m.to_string(),
                    c.n.to_string(),
                    c.d.to_string(),
                    real(c.printed),
                    real(c.computed_min),
                    real(c.computed_max),
                    real(c.computed_mean),
                    c.status.to_string(),
                ]
            });
            let header = [
                "dist",
                "claim",
                "k",
                "r",
                "m",
                "n",
                "d",
                "printed",
                "computed_min",
                "computed_max",
                "computed_mean",
                "status",
            ];
            csv_bytes(&header, rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::{classify_report, errata_report, scan, GridSpec, IdentityId, Params, ScanOptions};
    use crate::HazardModel;

    fn one_point_cor3() -> ScanReport {
        let m = HazardModel::exponential(1.0, 0.0).unwrap();
        let grid = GridSpec { lo: 0.5, hi: 2.0, count: 2, ..GridSpec::default_for(&m) };
        scan(IdentityId::Cor3, &Params::default(), &m, &ScanOptions::new(&m).grid(grid)).unwrap()
    }

    #[test]
    fn one_point_csv() {
        let bytes = serialize_report(&one_point_cor3(), Format::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SCAN_CSV_HEADER.join(","));
        assert!(
            lines[1].starts_with("cor3,exp:c=1,,,2,3,,5.0000000000000000e-1,,,2.0000000000000000e0,"),
            "{}",
            lines[1]
        );
    }

    #[test]
    fn quoted_dist() {
        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let r = scan(IdentityId::An, &Params::default(), &m, &ScanOptions::new(&m)).unwrap();
        let text = String::from_utf8(serialize_report(&r, Format::Csv).unwrap()).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 15);
        assert_eq!(&rows[0][1], "weibull:alpha=0.5,c=1");
        for (row, rec) in rows.iter().zip(&r.records) {
            assert_eq!(row[11].parse::<f64>().unwrap(), rec.lhs);
            assert_eq!(row[13].parse::<f64>().unwrap(), rec.rel_residual);
        }
    }

    #[test]
    fn json_round_trips() {
        let mut r = one_point_cor3();
        r.runtime_ms = None;
        let bytes = serialize_report(&r, Format::Json).unwrap();
        assert!(String::from_utf8_lossy(&bytes).contains("\"schema_version\": 1"));
        assert_eq!(from_json::<ScanReport>(&bytes).unwrap(), r);

        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let thm3 = scan(IdentityId::Thm3, &Params::krmn(1, 2, 2, 4), &m, &ScanOptions::new(&m)).unwrap();
        assert_eq!(from_json::<ScanReport>(&serialize_report(&thm3, Format::Json).unwrap()).unwrap(), thm3);

        let c = classify_report(&m, 1e-6).unwrap();
        assert_eq!(
            from_json::<crate::characterize::ClassifyReport>(&serialize_classify(&c, Format::Json).unwrap()).unwrap(),
            c
        );
        let e = errata_report(&m).unwrap();
        assert_eq!(from_json::<ErrataReport>(&serialize_errata(&e, Format::Json).unwrap()).unwrap(), e);
    }

    #[test]
    fn other_csv_layouts() {
        let m = HazardModel::weibull(0.5, 1.0).unwrap();
        let text = String::from_utf8(serialize_errata(&errata_report(&m).unwrap(), Format::Csv).unwrap()).unwrap();
        assert!(text.lines().any(|l| l.contains("spacing_outer,1,1,2,3,1,") && l.ends_with("MISMATCH")));
        let text =
            String::from_utf8(serialize_classify(&classify_report(&m, 1e-6).unwrap(), Format::Csv).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().skip(1).all(|l| l.ends_with("WeibullHalf")));
    }

    #[test]
    fn format_tokens() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
