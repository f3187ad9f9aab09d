//! The evaluation swarm: isolated evaluators and attestation collection.
//!
//! Every registered evaluator receives the identical serialized proof,
//! parses it independently, and emits raw bytes. The coordinator parses
//! each emission, verifies its signature and proof-hash binding, and
//! records exactly one slot per evaluator: signed, malformed, or timed
//! out. All slots are preserved verbatim for evidence — never only the
//! aggregate decision.

mod evaluators;

pub use evaluators::{
    EvaluatorBehavior, HumanEscalationAdapter, PolicyEvaluator, RiskEvaluator, RiskEvaluatorConfig,
    SimulationEvaluator, StateEvaluator, WorldModel,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use crate::canonical::{canonical_bytes, from_canonical};
use crate::crypto::{EvaluatorKey, KeyRegistry};
use crate::digest::hash;
use crate::model::{
    Attestation, AttestationOutcome, AttestationSlot, EvaluatorClass, EvaluatorId,
    JustificationProof,
};
use crate::time::LogicalTime;

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

/// Harness-controlled evaluator fault modes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum FaultMode {
    #[default]
    Honest,
    /// Emits bytes that do not parse as a well-formed attestation.
    MalformedOutput,
    /// Approves every proof regardless of content.
    AlwaysApprove,
}

/// One evaluator's registry entry: identity, class, key, standing fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluatorRegistration {
    pub evaluator_id: EvaluatorId,
    pub evaluator_class: EvaluatorClass,
    #[serde(default)]
    pub fault_mode: FaultMode,
    /// Hex-encoded Ed25519 public key; derived from the run seed when the
    /// registry file omits it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_key: Option<String>,
}

/// A registered evaluator wired with its key and behavior.
pub struct SwarmMember {
    pub registration: EvaluatorRegistration,
    pub key: EvaluatorKey,
    pub behavior: Box<dyn EvaluatorBehavior>,
}

/// The full swarm plus the public key registry derived from it.
pub struct Swarm {
    pub members: Vec<SwarmMember>,
    pub key_registry: KeyRegistry,
}

impl Swarm {
    pub fn new(members: Vec<SwarmMember>) -> Self {
        let mut key_registry = KeyRegistry::default();
        for member in &members {
            key_registry.register(
                member.registration.evaluator_id.as_str(),
                member.key.public_key_hex(),
            );
        }
        Swarm {
            members,
            key_registry,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Emission shape evaluators produce. A null `attestation` marks output
/// the evaluator itself knew was unusable (the proof hash did not
/// verify); the coordinator records such output as malformed.
#[derive(Serialize, Deserialize)]
struct RawEmission {
    attestation: Option<Attestation>,
}

/// Produce one evaluator's raw output for the given serialized proof,
/// under an explicit fault mode.
///
/// Isolation contract: the emission is a function of the proof bytes, the
/// evaluator's own registration and fixtures, and the logical time —
/// nothing else. Rerunning on the same inputs yields identical bytes.
pub fn emit_with(
    reg: &EvaluatorRegistration,
    fault: FaultMode,
    key: &EvaluatorKey,
    behavior: &dyn EvaluatorBehavior,
    proof_bytes: &[u8],
    now: LogicalTime,
) -> Vec<u8> {
    // Parse and hash-verify the distributed proof. Evaluators never trust
    // the embedded hash; they recompute it.
    let parsed: Option<JustificationProof> = from_canonical(proof_bytes).ok();
    let verified = parsed.filter(|p| p.hash_verifies());

    let honest_attestation = match &verified {
        Some(proof) => {
            let (decision, annotations) = behavior.judge(proof);
            Some(Attestation::signed(
                reg.evaluator_id.clone(),
                reg.evaluator_class,
                proof.proof_hash,
                decision,
                annotations,
                now,
                key,
            ))
        }
        // Unverifiable input: emit with the decision absent.
        None => None,
    };

    let bytes = canonical_bytes(&RawEmission {
        attestation: honest_attestation,
    })
    .expect("emissions are always canonical-serializable");

    match fault {
        FaultMode::Honest => bytes,
        FaultMode::MalformedOutput => {
            // Deterministically corrupt the emission so it cannot parse.
            let mut garbled = bytes;
            garbled.truncate(garbled.len() / 2);
            garbled.extend_from_slice(b"\x00<<corrupt>>");
            garbled
        }
        FaultMode::AlwaysApprove => match &verified {
            Some(proof) => {
                let att = Attestation::signed(
                    reg.evaluator_id.clone(),
                    reg.evaluator_class,
                    proof.proof_hash,
                    crate::model::AttestationDecision::Approve,
                    Default::default(),
                    now,
                    key,
                );
                canonical_bytes(&RawEmission {
                    attestation: Some(att),
                })
                .expect("emissions are always canonical-serializable")
            }
            None => bytes,
        },
    }
}

/// Emit under the member's registered fault mode.
pub fn emit(member: &SwarmMember, proof_bytes: &[u8], now: LogicalTime) -> Vec<u8> {
    emit_with(
        &member.registration,
        member.registration.fault_mode,
        &member.key,
        member.behavior.as_ref(),
        proof_bytes,
        now,
    )
}

// ---------------------------------------------------------------------------
// Collection
// ---------------------------------------------------------------------------

/// Dispatch the identical serialized proof to every registered evaluator
/// concurrently and collect one slot per evaluator.
///
/// Signatures are verified here; emissions that fail to parse, verify, or
/// bind to the distributed proof hash become malformed markers. Evaluators
/// that do not answer by `deadline` become timeout markers. Nothing is
/// dropped: absence, timeout, and malformation are all encoded for the
/// consensus rule to judge.
pub fn collect_attestations(
    proof: &JustificationProof,
    swarm: &Swarm,
    fault_overrides: &BTreeMap<EvaluatorId, FaultMode>,
    deadline: Duration,
    now: LogicalTime,
) -> Vec<AttestationSlot> {
    let proof_bytes = canonical_bytes(proof).expect("proofs are always canonical-serializable");
    let n = swarm.members.len();
    let mut emissions: Vec<Option<Vec<u8>>> = vec![None; n];

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, Vec<u8>)>();
        for (idx, member) in swarm.members.iter().enumerate() {
            let tx = tx.clone();
            let bytes = &proof_bytes;
            let fault = fault_overrides
                .get(&member.registration.evaluator_id)
                .copied()
                .unwrap_or(member.registration.fault_mode);
            scope.spawn(move || {
                let output = emit_with(
                    &member.registration,
                    fault,
                    &member.key,
                    member.behavior.as_ref(),
                    bytes,
                    now,
                );
                let _ = tx.send((idx, output));
            });
        }
        drop(tx);

        let started = Instant::now();
        let mut received = 0usize;
        while received < n {
            let remaining = deadline.saturating_sub(started.elapsed());
            match rx.recv_timeout(remaining) {
                Ok((idx, output)) => {
                    emissions[idx] = Some(output);
                    received += 1;
                }
                Err(_) => break, // deadline passed or all senders gone
            }
        }
    });

    emissions
        .into_iter()
        .zip(&swarm.members)
        .map(|(emission, member)| {
            let reg = &member.registration;
            let outcome = match emission {
                None => AttestationOutcome::TimedOut,
                Some(bytes) => classify_emission(&bytes, proof, reg, &swarm.key_registry),
            };
            AttestationSlot {
                evaluator_id: reg.evaluator_id.clone(),
                evaluator_class: reg.evaluator_class,
                outcome,
            }
        })
        .collect()
}

fn classify_emission(
    bytes: &[u8],
    proof: &JustificationProof,
    reg: &EvaluatorRegistration,
    keys: &KeyRegistry,
) -> AttestationOutcome {
    let malformed = |reason: &str| AttestationOutcome::Malformed {
        raw_digest: hash(bytes),
        reason: reason.to_string(),
    };
    let Ok(emission) = from_canonical::<RawEmission>(bytes) else {
        return malformed("unparseable emission");
    };
    let Some(attestation) = emission.attestation else {
        return malformed("decision field absent");
    };
    if attestation.evaluator_id != reg.evaluator_id {
        return malformed("evaluator id mismatch");
    }
    if attestation.proof_hash != proof.proof_hash {
        return malformed("attested proof hash differs from distributed proof");
    }
    if !attestation.signature_verifies(keys) {
        return malformed("signature verification failed");
    }
    AttestationOutcome::Signed { attestation }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures;
    use crate::model::AttestationDecision;

    fn proof_for(target: &str) -> JustificationProof {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let sources = world.context_sources(Default::default());
        let raw = crate::model::RawIntent {
            intent_id: "i-collect".into(),
            action: "TerminateInstance".into(),
            targets: vec![target.into()],
            parameters: Default::default(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(10),
        };
        crate::engine::construct_proof(&raw, &fixtures::alias_table(), &sources, &bundle, LogicalTime(10))
            .unwrap()
    }

    #[test]
    fn seven_honest_evaluators_sign_the_same_proof_hash() {
        let swarm = fixtures::swarm(42);
        let proof = proof_for("inst-0000");
        let slots = collect_attestations(
            &proof,
            &swarm,
            &BTreeMap::new(),
            Duration::from_secs(2),
            LogicalTime(11),
        );
        assert_eq!(slots.len(), 7);
        for slot in &slots {
            let att = slot.signed().expect("honest evaluator must sign");
            assert_eq!(att.proof_hash, proof.proof_hash);
            assert!(att.signature_verifies(&swarm.key_registry));
        }
    }

    #[test]
    fn malformed_fault_yields_six_valid_plus_one_marker() {
        let swarm = fixtures::swarm(42);
        let proof = proof_for("inst-0000");
        let mut overrides = BTreeMap::new();
        overrides.insert(EvaluatorId::from("policy-2"), FaultMode::MalformedOutput);
        let slots = collect_attestations(
            &proof,
            &swarm,
            &overrides,
            Duration::from_secs(2),
            LogicalTime(11),
        );
        let valid = slots.iter().filter(|s| s.signed().is_some()).count();
        let malformed = slots.iter().filter(|s| s.is_malformed()).count();
        assert_eq!((valid, malformed), (6, 1));
        let bad = slots
            .iter()
            .find(|s| s.evaluator_id.as_str() == "policy-2")
            .unwrap();
        assert!(bad.is_malformed());
    }

    #[test]
    fn rerunning_an_evaluator_is_deterministic() {
        let swarm = fixtures::swarm(42);
        let proof = proof_for("inst-0000");
        let bytes = canonical_bytes(&proof).unwrap();
        let member = &swarm.members[0];
        let a = emit(member, &bytes, LogicalTime(11));
        let b = emit(member, &bytes, LogicalTime(11));
        assert_eq!(a, b, "same proof, same registration, same fixtures");
    }

    #[test]
    fn tampered_proof_bytes_yield_decisionless_emission() {
        let swarm = fixtures::swarm(42);
        let proof = proof_for("inst-0000");
        let mut bytes = canonical_bytes(&proof).unwrap();
        // Flip one byte inside the serialized body.
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x01;
        let member = &swarm.members[0];
        let out = emit(member, &bytes, LogicalTime(11));
        match classify_emission(&out, &proof, &member.registration, &swarm.key_registry) {
            AttestationOutcome::Malformed { reason, .. } => {
                assert!(reason.contains("decision field absent") || reason.contains("unparseable"));
            }
            other => panic!("expected malformed, got {other:?}"),
        }
    }

    #[test]
    fn always_approve_fault_still_signs_validly() {
        let swarm = fixtures::swarm(42);
        let proof = proof_for("inst-0000");
        let mut overrides = BTreeMap::new();
        // State evaluators would normally reject a missing-context proof;
        // the rogue one approves anyway.
        overrides.insert(EvaluatorId::from("state-1"), FaultMode::AlwaysApprove);
        let slots = collect_attestations(
            &proof,
            &swarm,
            &overrides,
            Duration::from_secs(2),
            LogicalTime(11),
        );
        let rogue = slots
            .iter()
            .find(|s| s.evaluator_id.as_str() == "state-1")
            .unwrap();
        assert_eq!(rogue.decision(), Some(AttestationDecision::Approve));
    }
}
