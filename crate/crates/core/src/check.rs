use serde::{Deserialize, Serialize};

/// How a check's witness value is compared against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass iff `value <= tolerance` (residuals, errors).
    AtMost,
    /// Pass iff `value >= -tolerance` (minimum eigenvalues).
    AtLeastNegTol,
}

/// Outcome of one numerical check. `pass` always agrees with comparing
/// `value` against `tolerance`; a NaN value fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeastNegTol => value >= -tolerance,
        };
        Self {
            name: name.into(),
            pass,
            value,
            tolerance,
            comparison,
            detail: None,
        }
    }

    pub fn residual(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, tolerance, Comparison::AtMost)
    }

    pub fn lower_bound(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, tolerance, Comparison::AtLeastNegTol)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Combines several checks into one that passes iff all of them do; the
    /// value is the worst residual. Only meaningful for `AtMost` checks.
    pub fn all_of(name: impl Into<String>, parts: &[CheckResult]) -> Self {
        let name = name.into();
        let failing: Vec<&str> = parts.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let worst = parts
            .iter()
            .map(|c| match c.comparison {
                Comparison::AtMost => c.value - c.tolerance,
                Comparison::AtLeastNegTol => -c.value - c.tolerance,
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let mut out = Self {
            name,
            pass: failing.is_empty(),
            value: worst.max(0.0),
            tolerance: 0.0,
            comparison: Comparison::AtMost,
            detail: None,
        };
        if !failing.is_empty() {
            out.detail = Some(format!("failing: {}", failing.join(", ")));
        }
        out
    }
}
