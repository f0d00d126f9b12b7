use super::Estimate;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

pub const REPORT_SCHEMA: u32 = 1;

/// Outcome of one experiment.
///
/// `pass` holds exactly when `|lhs - rhs| <= tolerance + z * sqrt(lhs_se^2 + rhs_se^2)`.
/// Trend or structural checks that do not fit that form are listed in `checks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonReport {
    pub schema: u32,
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub tolerance: f64,
    pub z: f64,
    pub pass: bool,
    pub lhs_samples: usize,
    pub rhs_samples: usize,
    pub seed: Option<u64>,
    #[serde(default)]
    pub checks: BTreeMap<String, bool>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl ComparisonReport {
    pub fn new(experiment: impl Into<String>, lhs: Estimate, rhs: Estimate, tolerance: f64, z: f64) -> Self {
        let mut r = ComparisonReport {
            schema: REPORT_SCHEMA,
            experiment: experiment.into(),
            params: BTreeMap::new(),
            lhs: lhs.value,
            lhs_se: lhs.se,
            rhs: rhs.value,
            rhs_se: rhs.se,
            tolerance,
            z,
            pass: false,
            lhs_samples: lhs.n,
            rhs_samples: rhs.n,
            seed: None,
            checks: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
        };
        r.pass = r.comparison_holds();
        r
    }

    pub fn combined_se(&self) -> f64 {
        self.lhs_se.hypot(self.rhs_se)
    }

    fn comparison_holds(&self) -> bool {
        let gap = (self.lhs - self.rhs).abs();
        gap.is_finite() && gap <= self.tolerance + self.z * self.combined_se()
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Replaces the tolerance and re-evaluates `pass`.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.comparison_holds();
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn check(mut self, key: &str, ok: bool) -> Self {
        self.checks.insert(key.to_string(), ok);
        self
    }

    /// Records a diagnostic; non-finite values are stored as their sign times `f64::MAX`.
    pub fn diagnostic(mut self, key: &str, value: f64) -> Self {
        let v = if value.is_nan() {
            0.0
        } else if value.is_infinite() {
            value.signum() * f64::MAX
        } else {
            value
        };
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    /// The comparison and every auxiliary check passed.
    pub fn all_pass(&self) -> bool {
        self.pass && self.checks.values().all(|b| *b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: ComparisonReport = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Parse(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: lhs {:.6} (se {:.2e}) rhs {:.6} (se {:.2e}) tol {:.3e}",
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.experiment,
            self.lhs,
            self.lhs_se,
            self.rhs,
            self.rhs_se,
            self.tolerance
        )
    }
}
