//! CSV sinks. Every float is written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use mather_core::beta::BetaSample;
use mather_core::diophantine::ExcludedInterval;
use mather_core::Complex64;

use crate::CliError;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rows are collected in memory and written once, so the file content depends
/// only on the row order chosen by the caller.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Vec<String>> {
        self.rows.iter()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
        w.write_record(&self.header).map_err(|e| CliError::io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

pub fn out_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

pub const BETA_HEADER: [&str; 17] = [
    "omega_re",
    "omega_im",
    "beta_re",
    "beta_im",
    "beta_prime_re",
    "beta_prime_im",
    "phi_re",
    "phi_im",
    "method",
    "residual_sup",
    "error_estimate",
    "diophantine_verdict",
    "M",
    "tau",
    "N",
    "eps",
    "tol",
];

pub fn beta_row(s: &BetaSample, tol: f64) -> Vec<String> {
    let p = &s.provenance;
    vec![
        num(s.omega.re),
        num(s.omega.im),
        num(s.beta.re),
        num(s.beta.im),
        num(s.beta_prime.re),
        num(s.beta_prime.im),
        num(s.phi.re),
        num(s.phi.im),
        s.method.as_str().into(),
        opt(s.residual_sup),
        num(s.error_estimate),
        s.verdict.map(|v| v.to_string()).unwrap_or_default(),
        opt(p.m_const),
        opt(p.tau),
        p.cutoff.map(|n| n.to_string()).unwrap_or_default(),
        num(p.eps),
        num(tol),
    ]
}

/// A grid point without a sample: `method` names the outcome, values stay empty.
pub fn placeholder_row(
    omega: Complex64,
    outcome: &str,
    verdict: Option<String>,
    provenance: [Option<f64>; 2],
    eps: f64,
) -> Vec<String> {
    let mut row = vec![String::new(); BETA_HEADER.len()];
    row[0] = num(omega.re);
    row[1] = num(omega.im);
    row[8] = outcome.into();
    row[11] = verdict.unwrap_or_default();
    row[12] = opt(provenance[0]);
    row[13] = opt(provenance[1]);
    row[15] = num(eps);
    row
}

pub fn interval_table(intervals: &[ExcludedInterval]) -> Table {
    let mut t = Table::new(&["left", "right", "n", "m"]);
    for i in intervals {
        t.push(vec![num(i.left), num(i.right), i.n.to_string(), i.m.to_string()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, std::f64::consts::PI, -1.0 / 3.0, 6.02e23, 5e-324, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(opt(None), "");
    }
}
