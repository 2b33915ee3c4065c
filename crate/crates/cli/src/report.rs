use equinuc_core::nuclearity::{NormalizationRecord, SweepRow};
use equinuc_core::{CheckResult, Comparison};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    /// `null` when the check could not be evaluated.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub elapsed_ms: f64,
}

impl CheckRecord {
    pub fn from_check(check: CheckResult, elapsed_ms: f64) -> Self {
        Self {
            name: check.name,
            pass: check.pass,
            value: check.value.is_finite().then_some(check.value),
            tolerance: check.tolerance,
            comparison: check.comparison,
            detail: check.detail,
            elapsed_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    /// Largest value among the `at_most` checks.
    pub max_residual: f64,
}

/// Sizes of the constructed objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureInfo {
    pub group_order: usize,
    pub algebra_dim: usize,
    pub algebra_center_dim: usize,
    pub ambient_dim: usize,
    pub crossed_dim: usize,
    pub crossed_center_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub environment: Environment,
    pub tasks: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn summarize(checks: &[CheckRecord]) -> Summary {
        let passed = checks.iter().filter(|c| c.pass).count();
        let max_residual = checks
            .iter()
            .filter(|c| c.comparison == Comparison::AtMost)
            .filter_map(|c| c.value)
            .fold(0.0, f64::max);
        Summary {
            passed,
            failed: checks.len() - passed,
            max_residual,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    /// The sweep as CSV: `k,max_defect,max_error,err_<label>…`.
    pub fn sweep_csv(&self, labels: &[String]) -> Option<String> {
        let rows = self.sweep.as_ref()?;
        let mut out = String::from("k,max_defect,max_error");
        for label in labels {
            out.push_str(",err_");
            out.push_str(label);
        }
        out.push('\n');
        for row in rows {
            out.push_str(&format!("{},{:e},{:e}", row.k, row.max_defect, row.max_error));
            for e in &row.errors {
                out.push_str(&format!(",{e:e}"));
            }
            out.push('\n');
        }
        Some(out)
    }

    /// Fixed-width table of all checks followed by the summary line.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!(
            "{:<width$}  {:<4}  {:>12}  {:>9}  {:>9}\n",
            "check", "pass", "value", "tolerance", "ms"
        );
        for c in &self.checks {
            let value = c.value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
            out.push_str(&format!(
                "{:<width$}  {:<4}  {:>12}  {:>9.1e}  {:>9.1}\n",
                c.name,
                if c.pass { "ok" } else { "FAIL" },
                value,
                c.tolerance,
                c.elapsed_ms
            ));
        }
        out.push_str(&format!(
            "{} passed, {} failed, max residual {:.3e}\n",
            self.summary.passed, self.summary.failed, self.summary.max_residual
        ));
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, value: f64, pass: bool) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            pass,
            value: Some(value),
            tolerance: 1e-9,
            comparison: Comparison::AtMost,
            detail: None,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn summary_tallies_records() {
        let checks = vec![
            record("a", 1e-12, true),
            record("b", 0.5, false),
            record("c", 0.0, true),
        ];
        let s = RunReport::summarize(&checks);
        assert_eq!((s.passed, s.failed), (2, 1));
        assert_eq!(s.max_residual, 0.5);
    }

    #[test]
    fn non_finite_values_become_null() {
        let r = CheckRecord::from_check(CheckResult::residual("x", f64::NAN, 0.0), 1.0);
        assert!(!r.pass);
        assert_eq!(r.value, None);
        assert!(serde_json::to_string(&r).unwrap().contains("\"value\":null"));
    }
}
