use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::transforms::CheckConfig;

/// Outcome of one randomized condition check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub condition: String,
    pub subject: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub sample_count: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
    pub seed: u64,
    pub tolerance: f64,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(condition: &str, subject: String, cfg: &CheckConfig) -> Self {
        VerificationReport {
            condition: condition.to_string(),
            subject,
            passed: false,
            max_deviation: 0.0,
            mean_deviation: 0.0,
            sample_count: cfg.sample_count,
            evaluated: 0,
            skipped: 0,
            skip_reasons: BTreeMap::new(),
            seed: cfg.seed,
            tolerance: cfg.tolerance,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Sets `passed` from the deviation and sample counts.
    pub fn finish(mut self) -> Self {
        self.passed = self.evaluated > 0 && self.max_deviation <= self.tolerance;
        if self.evaluated == 0 {
            self.notes.push("no sample could be evaluated".into());
        }
        self
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: max {:.3e} (tol {:.1e}), {}/{} evaluated",
            if self.passed { "PASS" } else { "FAIL" },
            self.condition,
            self.max_deviation,
            self.tolerance,
            self.evaluated,
            self.sample_count
        )
    }
}
