//! Outcome of one inequality check, and its line-delimited JSON record.

use serde::{Deserialize, Serialize};

use crate::gram::Seed;
use crate::scalar::{Number, Scalar};

/// Relative tolerance for float-mode comparisons. Exact mode compares
/// exactly.
pub const FLOAT_REL_TOL: f64 = 1e-12;

/// Evidence behind the equality verdict. Fields that do not apply to a
/// check are left out.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_diagonal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Number>>,
    /// Coefficient indices that are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing_observed: Option<Vec<usize>>,
    /// Coefficient indices the characterization says are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing_predicted: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `lhs` is the side claimed to be the larger one, so `slack = lhs - rhs`
/// and the check holds iff `slack ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: Number,
    pub rhs: Number,
    pub slack: Number,
    pub holds: bool,
    pub equality_observed: bool,
    /// `None` when no characterization applies to the input.
    pub equality_predicted: Option<bool>,
    pub diagnosis: Diagnosis,
}

impl InequalityReport {
    /// Compares two values of one mode. Float mode treats
    /// `|slack| ≤ FLOAT_REL_TOL · max(|lhs|, |rhs|)` as equality.
    pub fn compare<T: Scalar>(
        name: impl Into<String>,
        lhs: T,
        rhs: T,
        equality_predicted: Option<bool>,
        diagnosis: Diagnosis,
    ) -> Self {
        let slack = lhs.clone() - rhs.clone();
        let scale = lhs.to_f64().abs().max(rhs.to_f64().abs());
        let equality_observed = slack.negligible(scale, FLOAT_REL_TOL);
        let holds = equality_observed || slack >= T::zero();
        InequalityReport {
            name: name.into(),
            lhs: lhs.to_number(),
            rhs: rhs.to_number(),
            slack: slack.to_number(),
            holds,
            equality_observed,
            equality_predicted,
            diagnosis,
        }
    }

    /// The inequality holds, the observed equality matches the prediction
    /// and the observed vanishing pattern matches the predicted one.
    pub fn is_consistent(&self) -> bool {
        self.holds
            && self
                .equality_predicted
                .is_none_or(|p| p == self.equality_observed)
            && (self.diagnosis.vanishing_predicted.is_none()
                || self.diagnosis.vanishing_predicted == self.diagnosis.vanishing_observed)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.diagnosis.notes.push(note.into());
        self
    }
}

/// One line of `--out` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub instance: u64,
    pub seed: Seed,
    /// Text form of the input, for replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(flatten)]
    pub report: InequalityReport,
}

impl Record {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}
