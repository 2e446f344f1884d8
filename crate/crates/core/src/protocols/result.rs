//! Shared result container for the protocol layer.

use crate::hilbert::QuantumState;
use std::fmt::Write as _;

/// A named scalar observable; ensemble-derived values carry a standard error
/// and the trajectory count they came from.
#[derive(Debug, Clone)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub count: Option<usize>,
}

/// A time-resolved (or parameter-resolved) trace as a small column table.
#[derive(Debug, Clone)]
pub struct Trace {
    pub name: String,
    /// Column headers, first column is the abscissa.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    /// Comma-separated table with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Scalars, traces, and optional state outputs of one protocol run.
#[derive(Debug, Clone, Default)]
pub struct ProtocolResult {
    pub scalars: Vec<Scalar>,
    pub traces: Vec<Trace>,
    pub states: Vec<(String, QuantumState)>,
}

impl ProtocolResult {
    pub fn push_scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.push(Scalar { name: name.into(), value, std_error: None, count: None });
    }

    pub fn push_ensemble_scalar(
        &mut self,
        name: impl Into<String>,
        value: f64,
        std_error: f64,
        count: usize,
    ) {
        self.scalars.push(Scalar {
            name: name.into(),
            value,
            std_error: Some(std_error),
            count: Some(count),
        });
    }

    pub fn scalar(&self, name: &str) -> Option<&Scalar> {
        self.scalars.iter().find(|s| s.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.scalar(name).map(|s| s.value)
    }

    pub fn trace(&self, name: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.name == name)
    }

    pub fn state(&self, name: &str) -> Option<&QuantumState> {
        self.states.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Structured text: one `name value [stderr count]` line per scalar.
    pub fn to_summary(&self, protocol: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# trionsim summary v1");
        let _ = writeln!(out, "protocol {protocol}");
        for s in &self.scalars {
            match (s.std_error, s.count) {
                (Some(e), Some(n)) => {
                    let _ = writeln!(out, "{} {:.12e} {:.12e} {n}", s.name, s.value, e);
                }
                _ => {
                    let _ = writeln!(out, "{} {:.12e}", s.name, s.value);
                }
            }
        }
        out
    }
}
