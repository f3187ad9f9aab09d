//! Policy bundles, the policy basis (Π), and risk assessments (R).

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use super::ids::{ActionClass, ProfileId};
use crate::canonical::canonical_digest;
use crate::digest::Digest256;

/// Risk classification of a proposed mutation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RiskClass {
    Low,
    High,
    Protected,
    BreakGlass,
}

impl RiskClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskClass::Low => "low",
            RiskClass::High => "high",
            RiskClass::Protected => "protected",
            RiskClass::BreakGlass => "break_glass",
        }
    }
}

impl fmt::Display for RiskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declarative match predicate over action, target protection, and
/// intent parameters. All present conditions must hold.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleMatch {
    /// Match a specific canonical action class; `None` matches any action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionClass>,
    /// Require that some target does / does not carry a protected marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protected_target: Option<bool>,
    /// Require the presence of an intent parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_parameter: Option<String>,
    /// Require the absence of an intent parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lacks_parameter: Option<String>,
}

/// Boundary construction template attached to a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryTemplate {
    /// Length of the validity window in logical ticks, anchored at proof
    /// construction time.
    pub validity_ticks: u64,
    /// Execution-time obligations attached to the boundary.
    pub obligations: BTreeSet<String>,
}

/// One ordered, declarative policy rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRule {
    pub rule_id: String,
    pub match_when: RuleMatch,
    pub risk_class: RiskClass,
    pub required_profile: ProfileId,
    pub boundary_template: BoundaryTemplate,
}

/// A versioned, digest-pinned policy bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyBundle {
    pub bundle_id: String,
    pub version: String,
    /// Tags that mark a resource as protected wherever they appear in
    /// protection context bindings.
    pub protected_resource_markers: BTreeSet<String>,
    pub rules: Vec<PolicyRule>,
}

impl PolicyBundle {
    /// Content digest of the bundle; two loads of the same file yield the
    /// same digest.
    pub fn digest(&self) -> Digest256 {
        canonical_digest(self).expect("policy bundles are always canonical-serializable")
    }
}

/// The policy basis Π recorded in a proof: which bundle version applied
/// and which rules matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyBasis {
    pub bundle_id: String,
    pub bundle_version: String,
    pub bundle_digest: Digest256,
    /// Ids of every rule whose predicate matched, in bundle order. The
    /// first entry drives risk and boundary derivation.
    pub matched_rule_ids: Vec<String>,
}

impl PolicyBasis {
    pub fn deny_by_default(&self) -> bool {
        self.matched_rule_ids.is_empty()
    }

    pub fn deciding_rule_id(&self) -> Option<&str> {
        self.matched_rule_ids.first().map(|s| s.as_str())
    }
}

/// Risk and admissibility assessment (R).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub risk_class: RiskClass,
    /// Machine-readable reason codes, e.g. `PROTECTED_TARGET`.
    pub rationale_codes: Vec<String>,
    pub required_profile: ProfileId,
}
