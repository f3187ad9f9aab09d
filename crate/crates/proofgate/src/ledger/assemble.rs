//! Record assembly and structural completeness checking.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{
    AttestationsClosedPayload, EventKind, IdentityEventPayload, Ledger, OutcomePayload,
    ProofCreatedPayload,
};
use crate::error::{Error, Result};
use crate::model::{EvidenceRecord, IntentId};

/// Reconstruct one intent's full lifecycle record from its sealed events.
///
/// Rejected and escalated intents assemble like executed ones, with the
/// identity and attempt absent. An intent refused at normalization has no
/// proof to assemble around and reports incompleteness naming that stage.
pub fn assemble_record(ledger: &Ledger, intent_id: &IntentId) -> Result<EvidenceRecord> {
    let events = ledger.events_for(intent_id);
    let missing = |stage: &str| Error::IncompleteEvidence {
        intent_id: intent_id.to_string(),
        missing: stage.to_string(),
    };

    let find = |kind: EventKind| events.iter().find(|e| e.kind == kind).copied();
    let proof_event = find(EventKind::ProofCreated).ok_or_else(|| missing("proof_created"))?;
    let attestation_event =
        find(EventKind::AttestationsClosed).ok_or_else(|| missing("attestations_closed"))?;
    let identity_event = find(EventKind::IdentityIssuedOrRefused)
        .ok_or_else(|| missing("identity_issued_or_refused"))?;
    let outcome_event = find(EventKind::OutcomeRecorded).ok_or_else(|| missing("outcome_recorded"))?;

    let proof_payload: ProofCreatedPayload = proof_event.typed_payload()?;
    let attestation_payload: AttestationsClosedPayload = attestation_event.typed_payload()?;
    let identity_payload: IdentityEventPayload = identity_event.typed_payload()?;
    let outcome_payload: OutcomePayload = outcome_event.typed_payload()?;

    let proof = proof_payload
        .proof
        .ok_or_else(|| missing("proof (intent refused at normalization)"))?;

    Ok(EvidenceRecord {
        record_id: intent_id.clone(),
        intent: proof_payload.intent,
        context_digest: proof.snapshot.snapshot_digest,
        policy_version: proof.policy_basis.bundle_version.clone(),
        proof,
        attestations: attestation_payload.slots,
        profile_id: attestation_payload.profile_id,
        decision: identity_payload.decision,
        identity: identity_payload.identity,
        attempt: outcome_payload.attempt,
        outcome: outcome_payload.outcome,
        append_events: vec![
            proof_event.clone(),
            attestation_event.clone(),
            identity_event.clone(),
            outcome_event.clone(),
        ],
    })
}

/// Structural completeness over a whole ledger.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub total_intents: usize,
    /// Intents with exactly one complete four-stage lifecycle.
    pub complete: usize,
    /// Complete lifecycles whose intent was refused at normalization
    /// (evidenced, but carrying no proof).
    pub refused_at_intake: Vec<IntentId>,
    /// intent → lifecycle stages with no event.
    pub orphans: BTreeMap<IntentId, Vec<String>>,
    /// intent → stages appended more than once.
    pub duplicates: BTreeMap<IntentId, Vec<String>>,
}

impl CompletenessReport {
    /// Exactly one structurally complete record per intent, nothing
    /// orphaned, nothing duplicated.
    pub fn clean(&self) -> bool {
        self.orphans.is_empty()
            && self.duplicates.is_empty()
            && self.complete == self.total_intents
    }
}

/// For every intent appearing in any event, assert exactly one
/// assemblable record; report duplicates and orphans.
pub fn completeness_check(ledger: &Ledger) -> CompletenessReport {
    let mut counts: BTreeMap<IntentId, BTreeMap<EventKind, usize>> = BTreeMap::new();
    for entry in ledger.entries() {
        *counts
            .entry(entry.intent_id.clone())
            .or_default()
            .entry(entry.kind)
            .or_insert(0) += 1;
    }

    let mut report = CompletenessReport {
        total_intents: counts.len(),
        ..CompletenessReport::default()
    };

    for (intent_id, kinds) in counts {
        let mut missing = Vec::new();
        let mut duplicated = Vec::new();
        for kind in EventKind::LIFECYCLE {
            match kinds.get(&kind).copied().unwrap_or(0) {
                0 => missing.push(kind.as_str().to_string()),
                1 => {}
                _ => duplicated.push(kind.as_str().to_string()),
            }
        }
        if !missing.is_empty() {
            report.orphans.insert(intent_id.clone(), missing);
            continue;
        }
        if !duplicated.is_empty() {
            report.duplicates.insert(intent_id.clone(), duplicated);
            continue;
        }
        // Structurally complete; classify intake refusals.
        let refused = ledger
            .events_for(&intent_id)
            .iter()
            .find(|e| e.kind == EventKind::ProofCreated)
            .and_then(|e| e.typed_payload::<ProofCreatedPayload>().ok())
            .is_some_and(|p| p.normalization_error.is_some());
        if refused {
            report.refused_at_intake.push(intent_id);
        }
        report.complete += 1;
    }

    report
}
