//! Replay: re-verifying why authority existed, from stored artifacts.
//!
//! Replay answers the five audit questions for one record — what mutation
//! was proposed, what context and policy were used, which evaluators
//! approved or rejected or abstained, what boundary was issued, and what
//! execution occurred with what outcome — and re-runs every recomputable
//! step: the proof hash, policy evaluation, boundary derivation,
//! attestation signatures, and the consensus decision. It needs nothing
//! from the live pipeline, only the record and the pinned artifact
//! stores.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use super::IdentityEventPayload;
use crate::consensus::{decide, ConsensusInput};
use crate::crypto::KeyRegistry;
use crate::engine::{derive_boundary, evaluate_policy};
use crate::model::{
    boundary_contains, EvidenceRecord, GovernanceProfiles, JustificationProof, OutcomeStatus,
    PolicyBundle, Verdict,
};

// ---------------------------------------------------------------------------
// Stores
// ---------------------------------------------------------------------------

/// Pinned artifacts replay resolves references against: policy bundle
/// versions, governance profiles, and evaluator public keys.
#[derive(Debug, Clone, Default)]
pub struct ArtifactStores {
    /// `"{bundle_id}@{version}"` → bundle.
    pub bundles: BTreeMap<String, PolicyBundle>,
    pub profiles: GovernanceProfiles,
    pub keys: KeyRegistry,
}

impl ArtifactStores {
    pub fn bundle_key(bundle_id: &str, version: &str) -> String {
        format!("{bundle_id}@{version}")
    }

    pub fn insert_bundle(&mut self, bundle: PolicyBundle) {
        self.bundles
            .insert(Self::bundle_key(&bundle.bundle_id, &bundle.version), bundle);
    }

    pub fn bundle_for(&self, proof: &JustificationProof) -> Option<&PolicyBundle> {
        self.bundles.get(&Self::bundle_key(
            &proof.policy_basis.bundle_id,
            &proof.policy_basis.bundle_version,
        ))
    }
}

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------

/// The five audit questions a complete record must answer.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum AuditQuestion {
    MutationProposed,
    ContextAndPolicy,
    EvaluatorVerdicts,
    BoundaryIssued,
    ExecutionOutcome,
}

impl AuditQuestion {
    pub const ALL: [AuditQuestion; 5] = [
        AuditQuestion::MutationProposed,
        AuditQuestion::ContextAndPolicy,
        AuditQuestion::EvaluatorVerdicts,
        AuditQuestion::BoundaryIssued,
        AuditQuestion::ExecutionOutcome,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuditQuestion::MutationProposed => "mutation_proposed",
            AuditQuestion::ContextAndPolicy => "context_and_policy",
            AuditQuestion::EvaluatorVerdicts => "evaluator_verdicts",
            AuditQuestion::BoundaryIssued => "boundary_issued",
            AuditQuestion::ExecutionOutcome => "execution_outcome",
        }
    }
}

impl fmt::Display for AuditQuestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Replay finding for one audit question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionFinding {
    pub question: AuditQuestion,
    /// The stored record carries the material to answer the question.
    pub answerable: bool,
    /// Every recomputation backing the answer matched the stored value.
    pub consistent: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Replay result for one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayVerdict {
    pub record_id: String,
    pub findings: Vec<QuestionFinding>,
    /// Set when replay could not run at all because a referenced artifact
    /// version is not in the store — distinct from a mismatch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocked: Option<String>,
}

impl ReplayVerdict {
    /// All five questions answerable with every recomputation matching.
    pub fn fully_replayable(&self) -> bool {
        self.blocked.is_none() && self.findings.iter().all(|f| f.answerable && f.consistent)
    }

    /// Fraction of the five questions answered consistently.
    pub fn score(&self) -> f64 {
        let good = self
            .findings
            .iter()
            .filter(|f| f.answerable && f.consistent)
            .count();
        good as f64 / AuditQuestion::ALL.len() as f64
    }

    pub fn failing_notes(&self) -> Vec<String> {
        self.findings
            .iter()
            .filter(|f| !(f.answerable && f.consistent))
            .flat_map(|f| f.notes.iter().cloned())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

/// Replay one record against the stores. Deterministic: repeated
/// invocations yield the same verdict.
pub fn replay(record: &EvidenceRecord, stores: &ArtifactStores) -> ReplayVerdict {
    let mut findings = Vec::with_capacity(5);
    let proof = &record.proof;

    // Q1: what mutation was proposed.
    {
        let hash_ok = proof.hash_verifies();
        let mutation_ok = proof.mutation == record.intent;
        findings.push(QuestionFinding {
            question: AuditQuestion::MutationProposed,
            answerable: true,
            consistent: hash_ok && mutation_ok,
            notes: match (hash_ok, mutation_ok) {
                (true, true) => vec![],
                (false, _) => vec!["proof hash does not recompute".into()],
                (_, false) => vec!["stored intent differs from proof mutation".into()],
            },
        });
    }

    // Q2: what context and policy were used.
    let bundle = stores.bundle_for(proof);
    match bundle {
        None => {
            // Replay-blocked: the pinned version is unavailable. Distinct
            // from a mismatch; nothing downstream can be recomputed.
            return ReplayVerdict {
                record_id: record.record_id.to_string(),
                findings,
                blocked: Some(format!(
                    "policy bundle {}@{} not in store",
                    proof.policy_basis.bundle_id, proof.policy_basis.bundle_version
                )),
            };
        }
        Some(bundle) => {
            let mut notes = Vec::new();
            if !proof.snapshot.digest_verifies() {
                notes.push("snapshot digest does not recompute".into());
            }
            if bundle.digest() != proof.policy_basis.bundle_digest {
                notes.push("stored bundle digest differs from pinned bundle".into());
            }
            let (replayed_basis, replayed_risk) =
                evaluate_policy(&proof.snapshot, bundle, &proof.mutation);
            if replayed_basis != proof.policy_basis {
                notes.push("policy basis does not re-derive".into());
            }
            if replayed_risk != proof.risk {
                notes.push("risk assessment does not re-derive".into());
            }
            let replayed_boundary = derive_boundary(
                &replayed_basis,
                &replayed_risk,
                bundle,
                &proof.mutation,
                proof.constructed_at,
            );
            if replayed_boundary != proof.boundary {
                notes.push("boundary does not re-derive".into());
            }
            findings.push(QuestionFinding {
                question: AuditQuestion::ContextAndPolicy,
                answerable: true,
                consistent: notes.is_empty(),
                notes,
            });
        }
    }

    // Q3: which evaluators approved, rejected, abstained — and does the
    // decision re-derive from them.
    {
        let mut notes = Vec::new();
        for slot in &record.attestations {
            if let Some(att) = slot.signed() {
                if !att.signature_verifies(&stores.keys) {
                    notes.push(format!(
                        "attestation signature from {} does not verify",
                        slot.evaluator_id
                    ));
                }
                if att.proof_hash != proof.proof_hash {
                    notes.push(format!(
                        "attestation from {} is bound to a different proof",
                        slot.evaluator_id
                    ));
                }
            }
        }
        match stores.profiles.get(&record.profile_id) {
            None => {
                return ReplayVerdict {
                    record_id: record.record_id.to_string(),
                    findings,
                    blocked: Some(format!("profile {} not in store", record.profile_id)),
                };
            }
            Some(profile) => {
                let decided_at = record
                    .append_events
                    .iter()
                    .find(|e| e.kind == super::EventKind::IdentityIssuedOrRefused)
                    .and_then(|e| e.typed_payload::<IdentityEventPayload>().ok())
                    .map(|p| p.decided_at);
                match decided_at {
                    None => notes.push("decision timing not recorded".into()),
                    Some(decided_at) => {
                        let replayed = decide(&ConsensusInput {
                            slots: record.attestations.clone(),
                            profile: profile.clone(),
                            proof_freshness: decided_at.age_of(proof.snapshot.freshness()),
                        });
                        if replayed != record.decision {
                            notes.push(format!(
                                "stored decision {} does not re-derive (replay says {})",
                                record.decision.verdict, replayed.verdict
                            ));
                        }
                    }
                }
            }
        }
        findings.push(QuestionFinding {
            question: AuditQuestion::EvaluatorVerdicts,
            answerable: true,
            consistent: notes.is_empty(),
            notes,
        });
    }

    // Q4: what boundary was issued.
    {
        let mut notes = Vec::new();
        match &record.identity {
            Some(identity) => {
                if record.decision.verdict != Verdict::Approve {
                    notes.push("identity exists without an approve decision".into());
                }
                if !boundary_contains(&identity.scope, &proof.boundary) {
                    notes.push("identity scope escapes the proof boundary".into());
                }
                if identity.lineage.proof_hash != proof.proof_hash {
                    notes.push("identity lineage points at a different proof".into());
                }
            }
            None => {
                if record.decision.verdict == Verdict::Approve {
                    let refusal_recorded = record
                        .append_events
                        .iter()
                        .find(|e| e.kind == super::EventKind::IdentityIssuedOrRefused)
                        .and_then(|e| e.typed_payload::<IdentityEventPayload>().ok())
                        .is_some_and(|p| p.refusal_reason.is_some());
                    if !refusal_recorded {
                        notes.push("approve decision but no identity and no refusal".into());
                    }
                }
            }
        }
        findings.push(QuestionFinding {
            question: AuditQuestion::BoundaryIssued,
            answerable: true,
            consistent: notes.is_empty(),
            notes,
        });
    }

    // Q5: what execution occurred and what outcome resulted.
    {
        let mut notes = Vec::new();
        let status = record.outcome.status;
        match record.decision.verdict {
            Verdict::Reject => {
                if status != OutcomeStatus::Rejected {
                    notes.push(format!("reject decision but outcome {status}"));
                }
            }
            Verdict::Escalate => {
                if status != OutcomeStatus::Escalated {
                    notes.push(format!("escalate decision but outcome {status}"));
                }
            }
            Verdict::Approve => match &record.identity {
                None => {
                    if status != OutcomeStatus::Escalated {
                        notes.push(format!("refused issuance but outcome {status}"));
                    }
                }
                Some(_) => {
                    if matches!(status, OutcomeStatus::Rejected | OutcomeStatus::Escalated) {
                        notes.push(format!("identity issued but outcome {status}"));
                    }
                    if status == OutcomeStatus::Executed {
                        if record.attempt.is_none() {
                            notes.push("executed outcome without a recorded attempt".into());
                        }
                        if record.outcome.substrate_receipt.is_none() {
                            notes.push("external substrate receipt missing".into());
                        }
                    }
                }
            },
        }
        findings.push(QuestionFinding {
            question: AuditQuestion::ExecutionOutcome,
            answerable: true,
            consistent: notes.is_empty(),
            notes,
        });
    }

    ReplayVerdict {
        record_id: record.record_id.to_string(),
        findings,
        blocked: None,
    }
}
