//! Machine-readable reports: pass/fail checks and convergence tables.

use serde::{Deserialize, Serialize};

/// Outcome of a single identity or inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tol: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn gaps(lhs: f64, rhs: f64) -> (f64, f64) {
        let abs_gap = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        (abs_gap, abs_gap / scale)
    }

    /// Equality check judged on the relative gap.
    pub fn relative(property: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let (abs_gap, rel_gap) = Self::gaps(lhs, rhs);
        CheckReport {
            property: property.to_string(),
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tol,
            pass: rel_gap <= tol,
            notes: vec!["relative gap compared to tol".to_string()],
        }
    }

    /// Equality check judged on the absolute gap.
    pub fn absolute(property: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let (abs_gap, rel_gap) = Self::gaps(lhs, rhs);
        CheckReport {
            property: property.to_string(),
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tol,
            pass: abs_gap <= tol,
            notes: vec!["absolute gap compared to tol".to_string()],
        }
    }

    /// One-sided check lhs ≤ rhs up to a relative slack.
    pub fn upper_bound(property: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let (abs_gap, rel_gap) = Self::gaps(lhs, rhs);
        CheckReport {
            property: property.to_string(),
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tol,
            pass: lhs <= rhs * (1.0 + tol) + tol * 1e-12,
            notes: vec!["inequality lhs <= rhs within relative slack tol".to_string()],
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// One δ entry of a convergence run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    /// Integral difference D(δ).
    pub difference: f64,
    /// R(δ) = D(δ) / δ^{2/(n+2)}.
    pub ratio: f64,
}

/// Convergence table of D(δ) and R(δ) with the fitted rate and the
/// extrapolated δ → 0 limit against the independently computed target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log D against log δ.
    pub log_log_slope: f64,
    /// Intercept of a linear fit of R against δ^{2/(n+2)} on the smallest δ.
    pub extrapolated_limit: f64,
    pub target: f64,
    pub relative_deviation: f64,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,difference,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{:.8e},{:.8e},{:.8e}\n", r.delta, r.difference, r.ratio));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_pass_fail() {
        assert!(CheckReport::relative("x", 1.0, 1.001, 0.01).pass);
        assert!(!CheckReport::relative("x", 1.0, 1.1, 0.01).pass);
    }

    #[test]
    fn absolute_pass_fail() {
        assert!(CheckReport::absolute("x", 2.5844, 2.5845, 1e-3).pass);
        assert!(!CheckReport::absolute("x", 2.58, 2.60, 1e-3).pass);
    }

    #[test]
    fn upper_bound_direction() {
        assert!(CheckReport::upper_bound("x", 0.9, 1.0, 0.0).pass);
        assert!(CheckReport::upper_bound("x", 1.0005, 1.0, 1e-3).pass);
        assert!(!CheckReport::upper_bound("x", 1.1, 1.0, 1e-3).pass);
    }

    #[test]
    fn json_roundtrip_stable() {
        let r = CheckReport::relative("prop", 1.0, 1.0, 0.1).note("extra");
        let j = r.to_json();
        let back: CheckReport = serde_json::from_str(&j).unwrap();
        assert_eq!(j, back.to_json());
    }
}
