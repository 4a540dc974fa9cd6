//! Check outcomes, residual accumulation, and the verification report.
//!
//! Report serialization is deterministic: struct fields serialize in a fixed
//! order, parameters live in sorted maps, and floats render via the shortest
//! decimal that round-trips, so byte-identical runs come from identical
//! inputs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::Point;

/// What kind of statement a check verifies. Converse checkers distinguish
/// hypotheses from conclusions so a violated premise is never reported as a
/// failed conclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckClass {
    Identity,
    Hypothesis,
    Conclusion,
    Calibration,
    Control,
}

/// Running max-abs residual with the coordinates of the worst point.
#[derive(Clone, Debug, Default)]
pub struct Residual {
    pub max: f64,
    pub witness: Option<Vec<f64>>,
}

impl Residual {
    pub fn new() -> Residual {
        Residual::default()
    }

    pub fn observe(&mut self, value: f64, pt: &Point) {
        self.observe_coords(value, pt.coords());
    }

    pub fn observe_coords(&mut self, value: f64, coords: &[f64]) {
        let v = value.abs();
        if self.witness.is_none() || v > self.max {
            self.max = v;
            self.witness = Some(coords.to_vec());
        }
    }

    pub fn merge(&mut self, other: &Residual) {
        if let Some(w) = &other.witness {
            self.observe_coords(other.max, w);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// The statement being tested, as plain math in chart terms.
    pub identity: String,
    pub class: CheckClass,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Coordinates of the worst sampled point, when meaningful.
    pub witness: Option<Vec<f64>>,
    pub detail: Option<String>,
}

impl CheckOutcome {
    /// Passes when the residual stays at or below the tolerance.
    pub fn upper(
        name: &str,
        identity: &str,
        class: CheckClass,
        residual: Residual,
        tolerance: f64,
    ) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            identity: identity.to_string(),
            class,
            max_residual: residual.max,
            tolerance,
            pass: residual.max <= tolerance,
            witness: residual.witness,
            detail: None,
        }
    }

    /// Passes when the residual is at least the threshold (negative
    /// controls: the broken variant must visibly deviate).
    pub fn lower(
        name: &str,
        identity: &str,
        class: CheckClass,
        residual: Residual,
        threshold: f64,
    ) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            identity: identity.to_string(),
            class,
            max_residual: residual.max,
            tolerance: threshold,
            pass: residual.max >= threshold,
            witness: residual.witness,
            detail: Some("lower bound: residual must reach the threshold".to_string()),
        }
    }

    /// A check that could not be evaluated; always a failure.
    pub fn error(name: &str, identity: &str, class: CheckClass, err: &str) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            identity: identity.to_string(),
            class,
            max_residual: f64::MAX,
            tolerance: 0.0,
            pass: false,
            witness: None,
            detail: Some(format!("evaluation failed: {err}")),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> CheckOutcome {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub name: String,
    /// Parameter expressions echoed verbatim, sorted by key.
    pub parameters: BTreeMap<String, String>,
}

/// Structure constants fixed by data rather than by convention choices made
/// in the code: the exterior-derivative pairing scale and the contact factor.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Calibrated {
    pub kappa: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub model: ModelInfo,
    pub seed: u64,
    pub samples: usize,
    pub calibrated: Calibrated,
    pub checks: Vec<CheckOutcome>,
    pub overall_pass: bool,
}

impl VerificationReport {
    pub fn new(
        model: ModelInfo,
        seed: u64,
        samples: usize,
        calibrated: Calibrated,
        checks: Vec<CheckOutcome>,
    ) -> VerificationReport {
        let overall_pass = checks.iter().all(|c| c.pass);
        VerificationReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            model,
            seed,
            samples,
            calibrated,
            checks,
            overall_pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let params = if self.model.parameters.is_empty() {
            String::new()
        } else {
            let kv: Vec<String> = self
                .model
                .parameters
                .iter()
                .map(|(k, v)| format!("{k} = {v}"))
                .collect();
            format!("  ({})", kv.join(", "))
        };
        out.push_str(&format!("model: {}{params}\n", self.model.name));
        out.push_str(&format!(
            "seed: {}   samples: {}\n",
            self.seed, self.samples
        ));
        match (self.calibrated.kappa, self.calibrated.c) {
            (Some(k), Some(c)) => out.push_str(&format!("calibrated: kappa = {k}, c = {c}\n")),
            (Some(k), None) => out.push_str(&format!("calibrated: kappa = {k}\n")),
            (None, Some(c)) => out.push_str(&format!("calibrated: c = {c}\n")),
            (None, None) => {}
        }
        out.push('\n');
        let name_width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(4);
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {:name_width$}  max {:>12.4e}  tol {:>8.1e}\n",
                c.name, c.max_residual, c.tolerance
            ));
            if !c.pass {
                if let Some(w) = &c.witness {
                    out.push_str(&format!("     at {w:?}\n"));
                }
                if let Some(d) = &c.detail {
                    out.push_str(&format!("     {d}\n"));
                }
            }
        }
        out.push('\n');
        out.push_str(&format!(
            "overall: {} ({} checks)\n",
            if self.overall_pass { "PASS" } else { "FAIL" },
            self.checks.len()
        ));
        out
    }
}
