//! Execution identities: ephemeral, proof-derived authority.

use serde::{Deserialize, Serialize};

use super::boundary::Boundary;
use super::ids::ProfileId;
use crate::digest::Digest256;
use crate::time::LogicalTime;

/// Where an identity's authority came from: the approved proof, the
/// attestation set, the governance profile, and the decision, each pinned
/// by digest so the chain back to evidence cannot drift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub proof_hash: Digest256,
    pub attestation_digest: Digest256,
    pub profile_id: ProfileId,
    pub decision_digest: Digest256,
}

/// An ephemeral, non-transferable identity whose scope is contained in
/// the proof boundary. It is a per-decision capability, not a role: it
/// exists only because a recorded proof was approved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionIdentity {
    pub identity_id: String,
    pub scope: Boundary,
    pub lineage: Lineage,
    pub issued_at: LogicalTime,
    pub issuer: String,
    /// Token binding the identity to the issuing pipeline run; attempts
    /// presented under a different run fail validation.
    pub non_transferable_binding: Digest256,
}
