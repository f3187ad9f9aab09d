//! Assembled evidence records.

use serde::{Deserialize, Serialize};

use super::attestation::AttestationSlot;
use super::decision::Decision;
use super::identity::ExecutionIdentity;
use super::ids::{IntentId, ProfileId};
use super::intent::Intent;
use super::outcome::{MutationAttempt, Outcome};
use super::proof::JustificationProof;
use crate::digest::Digest256;
use crate::ledger::LedgerEntry;

/// One intent's full authorization lifecycle, reconstructed from its
/// sealed ledger entries. Rejected and escalated intents still assemble:
/// they carry the proof, attestations, profile, and decision with the
/// identity and attempt absent and a terminal outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub record_id: IntentId,
    pub intent: Intent,
    /// Digest of the bound context snapshot.
    pub context_digest: Digest256,
    /// Version of the policy bundle that applied.
    pub policy_version: String,
    pub proof: JustificationProof,
    pub attestations: Vec<AttestationSlot>,
    pub profile_id: ProfileId,
    pub decision: Decision,
    pub identity: Option<ExecutionIdentity>,
    pub attempt: Option<MutationAttempt>,
    pub outcome: Outcome,
    /// The sealed ledger entries this record was assembled from, in
    /// lifecycle order.
    pub append_events: Vec<LedgerEntry>,
}
