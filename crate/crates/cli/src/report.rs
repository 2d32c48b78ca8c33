//! Reports, checks and CSV series.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Mode, Resolved};

/// Acceptance bound of one check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Bound {
    AtMost { value: f64 },
    AtLeast { value: f64 },
    Within { min: f64, max: f64 },
}

impl Bound {
    /// NaN never passes.
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Bound::AtMost { value } => x <= value,
            Bound::AtLeast { value } => x >= value,
            Bound::Within { min, max } => (min..=max).contains(&x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the identity being checked.
    pub anchor: String,
    pub measured: f64,
    pub tolerance: Bound,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, measured: f64, tolerance: Bound) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            tolerance,
            pass: tolerance.admits(measured),
        }
    }

    pub fn at_most(name: impl Into<String>, anchor: impl Into<String>, measured: f64, value: f64) -> Self {
        Self::new(name, anchor, measured, Bound::AtMost { value })
    }

    pub fn at_least(name: impl Into<String>, anchor: impl Into<String>, measured: f64, value: f64) -> Self {
        Self::new(name, anchor, measured, Bound::AtLeast { value })
    }

    pub fn within(name: impl Into<String>, anchor: impl Into<String>, measured: f64, min: f64, max: f64) -> Self {
        Self::new(name, anchor, measured, Bound::Within { min, max })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub config: Resolved,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    /// Early termination, e.g. a singular trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub status: Status,
}

impl Report {
    pub fn new(config: Resolved, checks: Vec<Check>, error: Option<String>) -> Self {
        let ok = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self {
            mode: config.mode,
            config,
            checks,
            timing: None,
            error,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

/// Column-oriented numeric table written as RFC-4180 CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_every_bound() {
        for b in [
            Bound::AtMost { value: 1.0 },
            Bound::AtLeast { value: 1.0 },
            Bound::Within { min: 0.0, max: 2.0 },
        ] {
            assert!(!b.admits(f64::NAN));
        }
        assert!(Bound::Within { min: 12.0, max: 20.0 }.admits(16.0));
    }

    #[test]
    fn csv_is_crlf_with_header() {
        let mut s = Series::new(["t", "x_re"]);
        s.push(vec![0.0, 1.5]);
        assert_eq!(s.to_csv(), "t,x_re\r\n0e0,1.5e0\r\n");
    }
}
