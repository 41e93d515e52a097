//! Machine-readable verification reports.
//!
//! Reports are JSON with `"schema": 1`. Every number is written with 17
//! significant digits so that a report round-trips exactly and two runs with
//! the same inputs produce identical bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// How a check decides `pass`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `|lhs - rhs| ≤ tolerance`.
    Equality,
    /// `lhs ≤ rhs + tolerance`.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Standard error of `lhs` for statistical checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    /// Number of randomized trials folded into `lhs`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl Check {
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Equality,
            lhs,
            rhs,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
            std_err: None,
            trials: None,
        }
    }

    pub fn bound(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: CheckKind::Bound,
            lhs,
            rhs,
            tolerance,
            pass: lhs <= rhs + tolerance,
            std_err: None,
            trials: None,
        }
    }

    /// A boolean verdict as an exact equality `1 = 1`.
    pub fn verdict(name: impl Into<String>, ok: bool) -> Self {
        Self::equality(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn with_std_err(mut self, se: f64) -> Self {
        self.std_err = Some(se);
        self
    }

    pub fn with_trials(mut self, n: usize) -> Self {
        self.trials = Some(n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub grid: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Suite-specific tabular output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, seed: u64, grid: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            seed,
            grid: grid.into(),
            checks: Vec::new(),
            wall_time_s: None,
            notes: Vec::new(),
            data: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Appends the checks of `other`, prefixing their names with its suite name.
    pub fn absorb(&mut self, other: SuiteReport) {
        for mut c in other.checks {
            c.name = format!("{}.{}", other.suite, c.name);
            self.checks.push(c);
        }
        for n in other.notes {
            self.notes.push(format!("{}: {n}", other.suite));
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser = Serializer::with_formatter(&mut buf, ExactFloats);
        self.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }
}

/// Compact JSON with floats as `{:.16e}`.
struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}
