use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::SCHEMA_HEADER;

/// Default relative slack tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Outcome of one inequality check. `holds` is `slack ≥ −tolerance · scale`
/// with `scale = 1 + |lhs| + |rhs|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Check identifier, optionally followed by `@` and the index set or `k`.
    pub check_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub tolerance: f64,
    pub input_seed: u64,
    pub dims: (usize, usize),
    pub gauge_spec: String,
}

impl VerificationReport {
    pub fn new(
        check_name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        dims: (usize, usize),
        gauge_spec: impl Into<String>,
    ) -> Self {
        let slack = rhs - lhs;
        let holds = slack >= -tolerance * (1.0 + lhs.abs() + rhs.abs());
        Self {
            check_name: check_name.into(),
            lhs,
            rhs,
            slack,
            holds,
            tolerance,
            input_seed: 0,
            dims,
            gauge_spec: gauge_spec.into(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.input_seed = seed;
        self
    }

    pub fn scale(&self) -> f64 {
        1.0 + self.lhs.abs() + self.rhs.abs()
    }

    /// Check name without the `@…` detail suffix.
    pub fn base_name(&self) -> &str {
        self.check_name.split('@').next().unwrap_or(&self.check_name)
    }
}

/// Writes `check_name,seed,m,n,gauge,lhs,rhs,slack,holds` rows after the
/// schema comment line.
pub fn write_reports_csv<W: Write>(mut out: W, reports: &[VerificationReport]) -> Result<()> {
    writeln!(out, "{SCHEMA_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check_name", "seed", "m", "n", "gauge", "lhs", "rhs", "slack", "holds"])?;
    for r in reports {
        w.write_record([
            r.check_name.clone(),
            r.input_seed.to_string(),
            r.dims.0.to_string(),
            r.dims.1.to_string(),
            r.gauge_spec.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.slack.to_string(),
            r.holds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
