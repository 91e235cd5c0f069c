//! Accuracy reporting: a JSON object, an aligned plain-text table, and an
//! optional per-trial CSV.

use serde::{Deserialize, Serialize};

use super::trials::TrialOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub exact_match: f64,
    /// Fraction within one grade of the truth.
    pub adjacent_accuracy: f64,
    /// Exact-match accuracy of the initial grade assessor alone.
    pub baseline_exact_match: f64,
    pub absolute_gain_points: f64,
    pub relative_gain_percent: f64,
    pub n_trials: u32,
    pub seed: u64,
}

impl AccuracyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("exact_match", format!("{:.4}", self.exact_match)),
            ("adjacent_accuracy", format!("{:.4}", self.adjacent_accuracy)),
            (
                "baseline_exact_match",
                format!("{:.4}", self.baseline_exact_match),
            ),
            (
                "absolute_gain_points",
                format!("{:+.1}", self.absolute_gain_points),
            ),
            (
                "relative_gain_percent",
                format!("{:+.1}", self.relative_gain_percent),
            ),
            ("n_trials", self.n_trials.to_string()),
            ("seed", self.seed.to_string()),
        ];
        let mut out = String::from("metric                  value\n");
        for (name, value) in rows {
            out.push_str(&format!("{name:<24}{value}\n"));
        }
        out
    }
}

pub fn per_trial_csv(per_trial: &[TrialOutcome]) -> String {
    let mut out = String::from("trial,n_test,exact,adjacent,baseline_exact\n");
    for t in per_trial {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t.trial, t.n_test, t.exact, t.adjacent, t.baseline_exact
        ));
    }
    out
}
