//! Quantitative audits of the rearrangement comparison `u♯ ≤ v`.

mod asymmetry;
mod constants;
mod counterexample;
mod distance;
mod instance;
mod normalize;
mod polya;
mod report;
mod level_sets;
mod stability;
mod talenti;

pub use asymmetry::*;
pub use constants::*;
pub use counterexample::*;
pub use distance::*;
pub use instance::*;
pub use normalize::*;
pub use polya::*;
pub use report::*;
pub use level_sets::*;
pub use stability::*;
pub use talenti::*;

use serde::Serialize;

/// One checked inequality `lhs ≤ rhs`, passing within `tol`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
    /// Set when a hypothesis of the estimate is not met, so a failure is
    /// not evidence against it.
    pub conditional: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        // relative slack for round-off in rhs
        let pass = lhs <= rhs + tol + 1e-12 * rhs.abs();
        Verdict { name: name.into(), lhs, rhs, tol, pass, conditional: false, note: None }
    }

    pub fn conditional_on(mut self, why: impl Into<String>) -> Self {
        self.conditional = true;
        self.append_note(why.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.append_note(note.into());
        self
    }

    fn append_note(&mut self, s: String) {
        self.note = Some(match self.note.take() {
            Some(prev) => format!("{prev}; {s}"),
            None => s,
        });
    }

    /// Fails unless conditional; conditional verdicts never count as failures.
    pub fn counts_as_failure(&self) -> bool {
        !self.pass && !self.conditional
    }
}
