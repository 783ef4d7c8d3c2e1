//! CSV input and output.
//!
//! Files start with `#`-prefixed metadata lines followed by a header row.
//! Reals are written with 17 significant digits, so a value read back is
//! bit-identical to the one written.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::ResultRow;
use crate::series::MultivariateSeries;

/// `#`-comment block written at the top of every output file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub config_hash: Option<String>,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mei {}", env!("CARGO_PKG_VERSION"));
        let none = || "none".to_string();
        let _ = writeln!(
            out,
            "# seed: {}",
            self.seed.map(|s| s.to_string()).unwrap_or_else(none)
        );
        let _ = writeln!(out, "# rng: {}", self.rng.clone().unwrap_or_else(none));
        let _ = writeln!(
            out,
            "# config_sha256: {}",
            self.config_hash.clone().unwrap_or_else(none)
        );
        for (k, v) in &self.extra {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Parses a series: optional `#` lines, a header with one name per
/// component, then one row of reals per time step.
pub fn read_series_csv(text: &str) -> Result<(Vec<String>, MultivariateSeries)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Parse {
                    line,
                    message: format!("`{f}` is not a finite real"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok((header, MultivariateSeries::from_rows(&rows)?))
}

pub fn write_series_csv(series: &MultivariateSeries, names: &[String], meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str(&names.join(","));
    out.push('\n');
    for l in 0..series.len() {
        let row: Vec<String> = series.row(l).into_iter().map(fmt_real).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub const RESULT_HEADER: &str = "process,estimator,k_n,r_n,angle_index,phi,tau_1,tau_2,theta_true,\
mean,bias,rmse,sample_variance,variance_ratio,successes,failures";

pub fn write_result_table(rows: &[ResultRow], meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        let tau = r.tau.as_slice();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.process,
            r.estimator,
            r.k_n,
            r.r_n,
            r.angle_index,
            fmt_real(r.phi),
            fmt_real(tau[0]),
            fmt_real(tau.get(1).copied().unwrap_or(f64::NAN)),
            fmt_real(r.theta_true),
            fmt_opt(r.mean),
            fmt_opt(r.bias),
            fmt_opt(r.rmse),
            fmt_opt(r.sample_variance),
            fmt_opt(r.variance_ratio),
            r.successes,
            r.failures
        );
    }
    out
}
