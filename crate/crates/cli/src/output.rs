//! Deterministic text output. Every float goes through [`num`], which prints
//! 17 significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use duowalk_core::{CorrelationMatrix, EntropyReport};
use serde_json::{json, Value};

use crate::config::Format;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Short time tag for file names: `4`, `0.5`, `12.25`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

pub fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// `<prefix><suffix>.<ext>`, keeping the prefix's own file name.
pub fn path_for(prefix: &Path, suffix: &str, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!("{suffix}.{ext}"));
    prefix.with_file_name(name)
}

pub fn write(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)
}

/// `L x L` correlation map with site labels on the first row and column.
pub fn gamma_text(gamma: &CorrelationMatrix, labels: &[i64], format: Format) -> String {
    let n = gamma.num_sites();
    match format {
        Format::Csv => {
            let mut out = String::from("site");
            for l in labels {
                write!(out, ",{l}").unwrap();
            }
            out.push('\n');
            for (k, l) in labels.iter().enumerate() {
                write!(out, "{l}").unwrap();
                for j in 0..n {
                    write!(out, ",{}", num(gamma.get(k, j))).unwrap();
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|j| gamma.get(k, j)).collect()).collect();
            pretty(&json!({ "time": gamma.time(), "labels": labels, "gamma": rows }))
        }
    }
}

/// One row of the distance table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRow {
    pub t: f64,
    pub d: f64,
    pub eta: Option<f64>,
    pub phi: Option<f64>,
}

pub fn distance_text(rows: &[DistanceRow], format: Format) -> String {
    let swept = rows.iter().any(|r| r.eta.is_some());
    match format {
        Format::Csv => {
            let mut out = String::from(if swept { "t,d,eta,phi\n" } else { "t,d\n" });
            for r in rows {
                write!(out, "{},{}", num(r.t), num(r.d)).unwrap();
                if swept {
                    write!(out, ",{},{}", num(r.eta.unwrap_or(f64::NAN)), num(r.phi.unwrap_or(f64::NAN))).unwrap();
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    if swept {
                        json!({ "t": r.t, "d": r.d, "eta": r.eta, "phi": r.phi })
                    } else {
                        json!({ "t": r.t, "d": r.d })
                    }
                })
                .collect();
            pretty(&Value::Array(rows))
        }
    }
}

/// `t, S, lambda_0, lambda_1, ...` with the spectrum largest first.
pub fn entropy_text(reports: &[EntropyReport], format: Format) -> String {
    match format {
        Format::Csv => {
            let width = reports.first().map_or(0, |r| r.spectrum.len());
            let mut out = String::from("t,S");
            for i in 0..width {
                write!(out, ",lambda_{i}").unwrap();
            }
            out.push('\n');
            for r in reports {
                write!(out, "{},{}", num(r.time), num(r.entropy)).unwrap();
                for l in &r.spectrum {
                    write!(out, ",{}", num(*l)).unwrap();
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| json!({ "t": r.time, "S": r.entropy, "spectrum": r.spectrum }))
                .collect();
            pretty(&Value::Array(rows))
        }
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
