//! Report bundles and their JSON/CSV serialization.
//!
//! Floats are written with exactly four decimals so that reruns with the same
//! inputs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

pub const REPORT_SCHEMA: &str = "revpref-report/1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A float serialized with four decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed4(pub f64);

impl Fixed4 {
    pub fn text(self) -> String {
        let s = format!("{:.4}", self.0);
        if s == "-0.0000" {
            "0.0000".to_string()
        } else {
            s
        }
    }
}

impl Serialize for Fixed4 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectError {
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub model: String,
    pub passes: usize,
    pub fails: usize,
    pub errors: usize,
    pub pass_rate: Option<Fixed4>,
    pub random_passes: usize,
    pub random_fails: usize,
    pub random_errors: usize,
    pub random_pass_rate: Option<Fixed4>,
    pub psi: Option<Fixed4>,
    /// Monte Carlo standard error of `psi` from the random pool.
    pub psi_sigma: Option<Fixed4>,
    pub avg_density: Option<Fixed4>,
    /// `avg_density` times the number of pairs (45 for ten alternatives).
    pub avg_revealed_pairs: Option<Fixed4>,
    pub pairs_total: usize,
    /// Passing subjects by number of revealed pairs.
    pub density_histogram: Vec<usize>,
    pub error_details: Vec<SubjectError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorReport {
    pub distinct_chosen: Vec<usize>,
    pub warp_involved: Vec<usize>,
    pub warp_directly_involved: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub random_subjects: usize,
    pub models: Vec<String>,
    pub data_digest: String,
    pub subjects: usize,
    pub menus: usize,
    pub alternatives: usize,
    pub node_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub schema: &'static str,
    pub provenance: Provenance,
    pub models: Vec<ModelReport>,
    pub indicators: IndicatorReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format '{s}'")),
        }
    }
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `model,metric,value` rows. Pool-level indicators use the model name
    /// `pool` and one metric per histogram bin.
    pub fn to_csv(&self) -> String {
        fn opt(v: Option<Fixed4>) -> String {
            v.map(Fixed4::text).unwrap_or_default()
        }
        let mut out = String::from("model,metric,value\n");
        let mut row = |model: &str, metric: &str, value: String| {
            let _ = writeln!(out, "{model},{metric},{value}");
        };
        for m in &self.models {
            let name = m.model.as_str();
            row(name, "passes", m.passes.to_string());
            row(name, "fails", m.fails.to_string());
            row(name, "errors", m.errors.to_string());
            row(name, "pass_rate", opt(m.pass_rate));
            row(name, "random_pass_rate", opt(m.random_pass_rate));
            row(name, "psi", opt(m.psi));
            row(name, "psi_sigma", opt(m.psi_sigma));
            row(name, "avg_density", opt(m.avg_density));
            row(name, "avg_revealed_pairs", opt(m.avg_revealed_pairs));
            for (k, c) in m.density_histogram.iter().enumerate() {
                row(name, &format!("revealed_pairs_{k}"), c.to_string());
            }
        }
        let ind = &self.indicators;
        for (metric, hist) in [
            ("distinct_chosen", &ind.distinct_chosen),
            ("warp_involved", &ind.warp_involved),
            ("warp_directly_involved", &ind.warp_directly_involved),
        ] {
            for (k, c) in hist.iter().enumerate() {
                row("pool", &format!("{metric}_{k}"), c.to_string());
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

pub fn write_report(
    bundle: &ReportBundle,
    path: &Path,
    format: ReportFormat,
) -> Result<(), ReportError> {
    fs::write(path, bundle.render(format)).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle() -> ReportBundle {
        ReportBundle {
            schema: REPORT_SCHEMA,
            provenance: Provenance {
                seed: 1,
                random_subjects: 10,
                models: vec!["la".into()],
                data_digest: "ab".into(),
                subjects: 2,
                menus: 1,
                alternatives: 2,
                node_budget: 5,
            },
            models: vec![ModelReport {
                model: "la".into(),
                passes: 2,
                fails: 0,
                errors: 0,
                pass_rate: Some(Fixed4(1.0)),
                random_passes: 10,
                random_fails: 0,
                random_errors: 0,
                random_pass_rate: Some(Fixed4(1.0)),
                psi: Some(Fixed4(-0.0)),
                psi_sigma: Some(Fixed4(0.0)),
                avg_density: Some(Fixed4(1.0 / 3.0)),
                avg_revealed_pairs: None,
                pairs_total: 1,
                density_histogram: vec![1, 1],
                error_details: vec![],
            }],
            indicators: IndicatorReport {
                distinct_chosen: vec![0, 2, 0],
                warp_involved: vec![2, 0, 0],
                warp_directly_involved: vec![2, 0, 0],
            },
        }
    }

    #[test]
    fn fixed_four_decimals() {
        assert_eq!(Fixed4(0.5).text(), "0.5000");
        assert_eq!(Fixed4(-0.00001).text(), "0.0000");
        assert_eq!(Fixed4(2.0 / 3.0).text(), "0.6667");
    }

    #[test]
    fn json_has_schema_and_fixed_floats() {
        let s = bundle().to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert!(s.contains("\"avg_density\": 0.3333"));
        assert!(s.contains("\"psi\": 0.0000"));
        assert!(s.contains("\"avg_revealed_pairs\": null"));
        assert_eq!(s, bundle().to_json());
    }

    #[test]
    fn csv_one_row_per_metric() {
        let s = bundle().to_csv();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("model,metric,value"));
        assert!(s.contains("la,pass_rate,1.0000\n"));
        assert!(s.contains("la,avg_revealed_pairs,\n"));
        assert!(s.contains("pool,distinct_chosen_1,2\n"));
        let keys: Vec<(&str, &str)> = s
            .lines()
            .skip(1)
            .map(|l| {
                let mut p = l.split(',');
                (p.next().unwrap(), p.next().unwrap())
            })
            .collect();
        let mut uniq = keys.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), keys.len());
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_report(&bundle(), &p, ReportFormat::Csv).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), bundle().to_csv());
        let bad = dir.path().join("missing").join("r.json");
        assert!(write_report(&bundle(), &bad, ReportFormat::Json).is_err());
    }
}
