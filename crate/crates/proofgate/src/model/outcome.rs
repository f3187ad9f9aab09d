//! Mutation attempts and observed outcomes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use super::ids::{ActionClass, ResourceId};
use crate::digest::Digest256;
use crate::time::LogicalTime;

/// What was observed for one obligation immediately before execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationObservation {
    pub held: bool,
    pub source: String,
}

/// A concrete mutation attempt presented under an execution identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationAttempt {
    pub attempt_id: String,
    pub identity_id: String,
    pub action: ActionClass,
    pub resources: Vec<ResourceId>,
    pub attempted_at: LogicalTime,
    /// Obligation name → what the broker observed at validation time.
    pub obligation_evidence: BTreeMap<String, ObligationObservation>,
}

/// Terminal status of one authorization lifecycle.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    /// The substrate applied the mutation.
    Executed,
    /// Refused: action, resource, or binding outside the identity scope.
    RefusedBoundary,
    /// Refused: attempt outside the validity window.
    RefusedExpired,
    /// Refused: an execution-time obligation did not hold.
    RefusedObligation,
    /// Consensus rejected; no identity was issued.
    Rejected,
    /// Consensus escalated; no identity was issued.
    Escalated,
    /// The substrate itself failed after a valid attempt.
    SubstrateError,
}

impl OutcomeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeStatus::Executed => "executed",
            OutcomeStatus::RefusedBoundary => "refused_boundary",
            OutcomeStatus::RefusedExpired => "refused_expired",
            OutcomeStatus::RefusedObligation => "refused_obligation",
            OutcomeStatus::Rejected => "rejected",
            OutcomeStatus::Escalated => "escalated",
            OutcomeStatus::SubstrateError => "substrate_error",
        }
    }

    /// True for every status except an applied mutation.
    pub fn blocked(self) -> bool {
        self != OutcomeStatus::Executed
    }
}

impl fmt::Display for OutcomeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The observed end of one lifecycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: OutcomeStatus,
    /// Digest of the substrate receipt for executed mutations. External
    /// receipts are optional: their loss degrades replay, never evidence
    /// completeness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate_receipt: Option<Digest256>,
    pub observed_at: LogicalTime,
}

impl Outcome {
    pub fn terminal(status: OutcomeStatus, observed_at: LogicalTime) -> Self {
        Outcome {
            status,
            substrate_receipt: None,
            observed_at,
        }
    }
}
