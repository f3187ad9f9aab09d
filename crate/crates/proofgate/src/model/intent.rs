//! Proposed and normalized mutation intents.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::ids::{ActionClass, IntentId, ResourceId};
use crate::time::LogicalTime;

/// An intent as submitted by a proposing agent, before normalization.
///
/// Action and target names may be tool-specific aliases; parameters are
/// unordered. Nothing in here is trusted until it has passed through
/// normalization and policy evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawIntent {
    pub intent_id: String,
    pub action: String,
    pub targets: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub proposer: String,
    pub submitted_at: LogicalTime,
}

/// A normalized intent: the mutation specification evaluators judge.
///
/// The proposer is metadata for the decision, never a source of authority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub intent_id: IntentId,
    pub action: ActionClass,
    pub targets: Vec<ResourceId>,
    pub parameters: BTreeMap<String, String>,
    pub proposer: String,
    pub submitted_at: LogicalTime,
}

impl Intent {
    /// Whether the break-glass emergency parameter is set.
    pub fn break_glass(&self) -> bool {
        self.parameters
            .get("break_glass")
            .is_some_and(|v| v == "true")
    }

    pub fn has_parameter(&self, key: &str) -> bool {
        self.parameters.contains_key(key)
    }
}
