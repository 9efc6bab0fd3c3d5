//! CSV and JSON emission.
//!
//! Numbers are written in shortest round-trip form, in exponent notation
//! outside `[1e-5, 1e16)`, with `inf` for +∞. Traces are thinned: every step
//! up to [`DENSE_STEPS`], then steps growing by [`THIN_FACTOR`], always
//! ending at the horizon.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lossgeom::{Bound, Degree, GrowthFit, Verdict};
use serde::Serialize;

use crate::error::{Result, RunError};

pub const DENSE_STEPS: usize = 1000;
pub const THIN_FACTOR: f64 = 1.01;

/// Steps `1..=horizon` that are written to trace files.
pub fn thinned_steps(horizon: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (1..=horizon.min(DENSE_STEPS)).collect();
    let mut t = DENSE_STEPS;
    while t < horizon {
        t = ((t as f64 * THIN_FACTOR).ceil() as usize).max(t + 1).min(horizon);
        steps.push(t);
    }
    steps
}

pub fn format_number(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x != 0.0 && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Parses CSV written by [`Table::to_csv`].
    pub fn parse_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
        let mut lines = text.lines();
        let header = lines.next()?.split(',').map(String::from).collect();
        let rows = lines
            .map(|line| line.split(',').map(|c| c.parse::<f64>().ok()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some((header, rows))
    }
}

/// A finite number or a descriptive string such as `"unbounded"`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Integer(u32),
    Number(f64),
    Text(String),
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Integer(k) => write!(f, "{k}"),
            Quantity::Number(x) => write!(f, "{}", format_number(*x)),
            Quantity::Text(s) => f.write_str(s),
        }
    }
}

impl Quantity {
    pub fn number(&self) -> Option<f64> {
        match self {
            Quantity::Integer(k) => Some(*k as f64),
            Quantity::Number(x) => Some(*x),
            Quantity::Text(_) => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Quantity::Text(s) if s == "unbounded")
    }
}

impl From<Bound<f64>> for Quantity {
    fn from(b: Bound<f64>) -> Self {
        match b {
            Bound::Finite(x) => Quantity::Number(x),
            Bound::Unbounded => Quantity::Text("unbounded".into()),
        }
    }
}

impl From<Degree> for Quantity {
    fn from(d: Degree) -> Self {
        match d {
            Degree::Finite(k) => Quantity::Integer(k),
            other => Quantity::Text(other.to_string()),
        }
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            Quantity::Number(x)
        } else {
            Quantity::Text(format_number(x))
        }
    }
}

/// Verdict name plus the flattened growth fit.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerdictFields {
    pub verdict: String,
    pub growth_exponent: Option<f64>,
    pub growth_amplitude: Option<f64>,
    pub growth_t_lo: Option<usize>,
    pub growth_t_hi: Option<usize>,
    pub growth_residual: Option<f64>,
}

impl VerdictFields {
    pub fn new(verdict: &Verdict<f64>) -> Self {
        match verdict {
            Verdict::Bounded => VerdictFields { verdict: "bounded".into(), ..Default::default() },
            Verdict::Growing(fit) => {
                let mut v = VerdictFields { verdict: "growing".into(), ..Default::default() };
                if let Some(fit) = fit {
                    v.set_fit(fit);
                }
                v
            }
        }
    }

    fn set_fit(&mut self, fit: &GrowthFit<f64>) {
        self.growth_exponent = Some(fit.exponent);
        self.growth_amplitude = Some(fit.amplitude);
        self.growth_t_lo = Some(fit.t_lo);
        self.growth_t_hi = Some(fit.t_hi);
        self.growth_residual = Some(fit.residual);
    }
}

/// Files gathered during a run and written together at the end.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
    summary: Option<String>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn add_json<S: Serialize>(&mut self, name: &str, value: &S) {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        self.add(name, text + "\n");
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Text printed to stdout in place of the JSON report.
    pub fn set_summary(&mut self, text: String) {
        self.summary = Some(text);
    }

    /// The summary if one was set, else `report.json`.
    pub fn stdout(&self) -> Option<&str> {
        self.summary.as_deref().or_else(|| self.get("report.json"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| RunError::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_is_dense_then_geometric() {
        let steps = thinned_steps(1_000_000);
        assert_eq!(&steps[..3], &[1, 2, 3]);
        assert_eq!(steps[999], 1000);
        assert_eq!(steps[1000], 1010);
        assert_eq!(*steps.last().unwrap(), 1_000_000);
        assert!(steps.windows(2).all(|w| w[1] > w[0]));
        assert!(steps.len() < 2000);
        assert_eq!(thinned_steps(5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn csv_round_trips_exact_doubles() {
        let mut t = Table::new(vec!["T", "x"]);
        let values = [0.1 + 0.2, 1e-300, -4.440892098500626e-16, 3e20, f64::INFINITY, 999.0 * 2f64.ln(), -0.0];
        for (i, &v) in values.iter().enumerate() {
            t.push(vec![i as f64, v]);
        }
        let csv = t.to_csv();
        assert!(csv.contains(",inf\n"));
        assert!(!csv.contains('\r'));
        let (header, rows) = Table::parse_csv(&csv).unwrap();
        assert_eq!(header, vec!["T", "x"]);
        for (row, &v) in rows.iter().zip(&values) {
            assert_eq!(row[1].to_bits(), v.to_bits());
        }
    }
}
