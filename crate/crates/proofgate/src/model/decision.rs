//! Consensus decisions.

use serde::{Deserialize, Serialize};
use std::fmt;

/// The decision space: approve, reject, or escalate. Nothing else.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Approve,
    Reject,
    Escalate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Approve => "approve",
            Verdict::Reject => "reject",
            Verdict::Escalate => "escalate",
        })
    }
}

/// Which branch of the consensus rule fired.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum DecisionBasis {
    /// A veto-capable evaluator rejected.
    Veto,
    /// Rejections reached the rejection threshold.
    RejectionThreshold,
    /// A required class produced no well-formed attestation in time.
    MissingClass,
    /// The snapshot aged past the freshness window before decision.
    FreshnessFailure,
    /// A required-class evaluator produced malformed output.
    MalformedRequiredClass,
    /// Fewer valid signatures than the m-of-n threshold.
    SignatureThreshold,
    /// Quorum and diversity both satisfied.
    Quorum,
    /// Quorum satisfied but approvals span too few classes.
    DiversityFailure,
    /// No other branch fired.
    DefaultEscalate,
}

/// The consensus outcome with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub basis: DecisionBasis,
}

impl Decision {
    pub fn approved(&self) -> bool {
        self.verdict == Verdict::Approve
    }
}
