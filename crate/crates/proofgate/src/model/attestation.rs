//! Evaluator attestations and per-round collection slots.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::ids::EvaluatorId;
use crate::canonical::canonical_bytes;
use crate::crypto::{EvaluatorKey, KeyRegistry, SignatureHex};
use crate::digest::Digest256;
use crate::time::LogicalTime;

/// The five evaluator classes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorClass {
    Policy,
    State,
    Risk,
    Simulation,
    HumanEscalation,
}

impl EvaluatorClass {
    pub const ALL: [EvaluatorClass; 5] = [
        EvaluatorClass::Policy,
        EvaluatorClass::State,
        EvaluatorClass::Risk,
        EvaluatorClass::Simulation,
        EvaluatorClass::HumanEscalation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvaluatorClass::Policy => "policy",
            EvaluatorClass::State => "state",
            EvaluatorClass::Risk => "risk",
            EvaluatorClass::Simulation => "simulation",
            EvaluatorClass::HumanEscalation => "human_escalation",
        }
    }
}

impl fmt::Display for EvaluatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single evaluator's verdict.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum AttestationDecision {
    Approve,
    Reject,
    Abstain,
}

/// Structured evaluator annotations: objections, obligations, confidence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    /// Machine-readable objection codes, e.g. `STALE_STATE`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objections: Vec<String>,
    /// Obligations the evaluator wants enforced at execution time.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obligations: Vec<String>,
    /// Confidence in percent, when the evaluator reports one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<u8>,
    /// Digest of the predicted post-state, emitted by simulation evaluators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_effect: Option<Digest256>,
}

impl Annotations {
    pub fn objection(code: &str) -> Self {
        Annotations {
            objections: vec![code.to_string()],
            ..Annotations::default()
        }
    }
}

/// A signed per-evaluator verdict bound to a proof hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub evaluator_id: EvaluatorId,
    pub evaluator_class: EvaluatorClass,
    pub proof_hash: Digest256,
    pub decision: AttestationDecision,
    pub annotations: Annotations,
    pub issued_at: LogicalTime,
    pub signature: SignatureHex,
}

/// The exact byte sequence an attestation signature covers.
#[derive(Serialize)]
struct SigningView<'a> {
    evaluator_id: &'a EvaluatorId,
    proof_hash: &'a Digest256,
    decision: AttestationDecision,
    annotations: &'a Annotations,
    issued_at: LogicalTime,
}

impl Attestation {
    pub fn signing_payload(
        evaluator_id: &EvaluatorId,
        proof_hash: &Digest256,
        decision: AttestationDecision,
        annotations: &Annotations,
        issued_at: LogicalTime,
    ) -> Vec<u8> {
        canonical_bytes(&SigningView {
            evaluator_id,
            proof_hash,
            decision,
            annotations,
            issued_at,
        })
        .expect("signing views are always canonical-serializable")
    }

    /// Build and sign an attestation with the evaluator's key.
    pub fn signed(
        evaluator_id: EvaluatorId,
        evaluator_class: EvaluatorClass,
        proof_hash: Digest256,
        decision: AttestationDecision,
        annotations: Annotations,
        issued_at: LogicalTime,
        key: &EvaluatorKey,
    ) -> Self {
        let payload =
            Self::signing_payload(&evaluator_id, &proof_hash, decision, &annotations, issued_at);
        let signature = key.sign(&payload);
        Attestation {
            evaluator_id,
            evaluator_class,
            proof_hash,
            decision,
            annotations,
            issued_at,
            signature,
        }
    }

    /// Verify the signature against the registered key for this evaluator.
    pub fn signature_verifies(&self, registry: &KeyRegistry) -> bool {
        let payload = Self::signing_payload(
            &self.evaluator_id,
            &self.proof_hash,
            self.decision,
            &self.annotations,
            self.issued_at,
        );
        registry.verify(self.evaluator_id.as_str(), &payload, &self.signature)
    }
}

/// What the coordinator recorded for one evaluator in one collection round.
///
/// Timed-out is distinct from abstain: an abstaining evaluator judged and
/// declined; a timed-out one never answered, and the consensus rule treats
/// a required class that never answered as grounds to escalate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AttestationOutcome {
    /// A well-formed attestation whose signature verified and whose proof
    /// hash matches the proof the coordinator distributed.
    Signed { attestation: Attestation },
    /// Output that failed to parse, failed signature verification, or was
    /// bound to a different proof hash. The raw emission is preserved by
    /// digest so review can inspect what was actually produced.
    Malformed { raw_digest: Digest256, reason: String },
    /// No output before the collection deadline.
    TimedOut,
}

/// One registered evaluator's slot in a collection round. Every round
/// carries exactly one slot per registered evaluator, so absence is
/// always explicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttestationSlot {
    pub evaluator_id: EvaluatorId,
    pub evaluator_class: EvaluatorClass,
    #[serde(flatten)]
    pub outcome: AttestationOutcome,
}

impl AttestationSlot {
    pub fn signed(&self) -> Option<&Attestation> {
        match &self.outcome {
            AttestationOutcome::Signed { attestation } => Some(attestation),
            _ => None,
        }
    }

    pub fn is_malformed(&self) -> bool {
        matches!(self.outcome, AttestationOutcome::Malformed { .. })
    }

    pub fn decision(&self) -> Option<AttestationDecision> {
        self.signed().map(|a| a.decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_covers_all_attested_fields() {
        let key = EvaluatorKey::derive(3, "policy-1");
        let mut registry = KeyRegistry::default();
        registry.register("policy-1", key.public_key_hex());

        let att = Attestation::signed(
            EvaluatorId::from("policy-1"),
            EvaluatorClass::Policy,
            crate::digest::hash(b"proof"),
            AttestationDecision::Approve,
            Annotations::default(),
            LogicalTime(5),
            &key,
        );
        assert!(att.signature_verifies(&registry));

        // Any attested field change invalidates the signature.
        let mut flipped = att.clone();
        flipped.decision = AttestationDecision::Reject;
        assert!(!flipped.signature_verifies(&registry));

        let mut retimed = att;
        retimed.issued_at = LogicalTime(6);
        assert!(!retimed.signature_verifies(&registry));
    }

    #[test]
    fn slot_round_trips_through_canonical_form() {
        let key = EvaluatorKey::derive(4, "state-1");
        let att = Attestation::signed(
            EvaluatorId::from("state-1"),
            EvaluatorClass::State,
            crate::digest::hash(b"p"),
            AttestationDecision::Reject,
            Annotations::objection("STALE_STATE"),
            LogicalTime(9),
            &key,
        );
        let slot = AttestationSlot {
            evaluator_id: att.evaluator_id.clone(),
            evaluator_class: att.evaluator_class,
            outcome: AttestationOutcome::Signed { attestation: att },
        };
        let bytes = canonical_bytes(&slot).unwrap();
        let parsed: AttestationSlot = crate::canonical::from_canonical(&bytes).unwrap();
        assert_eq!(parsed, slot);
    }
}
