//! Report containers shared by the validators, with JSON and aligned-text
//! rendering. All reports are deterministic for a fixed seed.

use serde::Serialize;
use serde_json::{json, Value};

/// Outcome of a single invariant line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Identity has no content at these degrees (e.g. everything lands in a
    /// zero space).
    Vacuous,
    /// The sample band needed to make the identity exact exceeds the model
    /// cutoff; nothing is asserted.
    BandOverflow,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Vacuous => "vacuous",
            Status::BandOverflow => "band overflow",
        }
    }
}

/// One invariant check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub detail: String,
    pub residual: f64,
    pub status: Status,
}

impl CheckLine {
    pub fn measured(name: &str, detail: String, residual: f64, tol: f64) -> Self {
        CheckLine {
            name: name.to_string(),
            detail,
            residual,
            status: if residual < tol {
                Status::Pass
            } else {
                Status::Fail
            },
        }
    }

    pub fn vacuous(name: &str, detail: String) -> Self {
        CheckLine {
            name: name.to_string(),
            detail,
            residual: 0.0,
            status: Status::Vacuous,
        }
    }

    pub fn band_overflow(name: &str, detail: String) -> Self {
        CheckLine {
            name: name.to_string(),
            detail,
            residual: 0.0,
            status: Status::BandOverflow,
        }
    }
}

/// A titled block of invariant checks.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub title: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub lines: Vec<CheckLine>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(title: &str, seed: u64, samples: usize, tol: f64, lines: Vec<CheckLine>) -> Self {
        let pass = lines.iter().all(|l| l.status != Status::Fail);
        CheckReport {
            title: title.to_string(),
            seed,
            samples,
            tol,
            lines,
            pass,
        }
    }

    /// First failing line, if any.
    pub fn first_failure(&self) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.status == Status::Fail)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "title": self.title,
            "seed": self.seed,
            "samples": self.samples,
            "tol": self.tol,
            "pass": self.pass,
            "lines": self.lines.iter().map(|l| json!({
                "name": l.name,
                "detail": l.detail,
                "residual": l.residual,
                "status": l.status,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "== {} (seed {}, {} samples, tol {:.1e}) ==\n",
            self.title, self.seed, self.samples, self.tol
        ));
        for l in &self.lines {
            out.push_str(&format!(
                "  {:<44} {:>12.3e}  {}\n",
                format!("{} {}", l.name, l.detail),
                l.residual,
                l.status.label()
            ));
        }
        out.push_str(&format!(
            "  => {}\n",
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}
