//! The execution broker: identity derivation, attempt validation, and
//! the stub substrate.
//!
//! The broker owns enforcement. Identities are derived only from approve
//! decisions, scoped no wider than the proof boundary (narrowing is
//! profile-driven, widening is structurally impossible), and every
//! mutation attempt is re-validated — action, resources, time window,
//! run binding, and obligations — immediately before the substrate call.
//! The stub substrate has no public mutation path that bypasses the
//! broker, which is how enforcement fidelity is modeled by construction.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::canonical::canonical_digest;
use crate::digest::{hash_pair, Digest256};
use crate::error::{Error, Result};
use crate::model::{
    boundary_contains, AttestationSlot, Boundary, Decision, ExecutionIdentity, GovernanceMetadata,
    JustificationProof, Lineage, MutationAttempt, ObligationObservation, Outcome, OutcomeStatus,
    ResourceId, ValidityWindow,
};
use crate::time::LogicalTime;

// ---------------------------------------------------------------------------
// Broker
// ---------------------------------------------------------------------------

/// Issues identities for one pipeline run. The run token feeds the
/// non-transferable binding: identities presented under another run fail
/// validation.
pub struct ExecutionBroker {
    pub issuer: String,
    pub run_token: Digest256,
}

impl ExecutionBroker {
    pub fn new(issuer: impl Into<String>, run_token: Digest256) -> Self {
        Self {
            issuer: issuer.into(),
            run_token,
        }
    }

    fn binding_for(&self, identity_id: &str) -> Digest256 {
        hash_pair(self.run_token.as_bytes(), identity_id.as_bytes())
    }

    /// Derive a bounded execution identity from an approved proof.
    ///
    /// Hard precondition: the decision must be approve. The scope is the
    /// proof boundary narrowed to the profile's identity lifetime, and
    /// containment is re-checked at issuance; a scope that escaped the
    /// boundary refuses issuance rather than widening authority.
    pub fn derive_identity(
        &self,
        proof: &JustificationProof,
        attestations: &[AttestationSlot],
        profile: &GovernanceMetadata,
        decision: &Decision,
        now: LogicalTime,
    ) -> Result<ExecutionIdentity> {
        if !decision.approved() {
            return Err(Error::IssuanceRefused(format!(
                "decision is {}, not approve",
                decision.verdict
            )));
        }
        let boundary = &proof.boundary;
        if !boundary.issuable() {
            return Err(Error::IssuanceRefused(
                "proof boundary permits no issuance".into(),
            ));
        }
        if now > boundary.validity.not_after {
            return Err(Error::IssuanceRefused(
                "proof validity window already closed".into(),
            ));
        }

        let not_before = boundary.validity.not_before.max(now);
        let not_after = boundary
            .validity
            .not_after
            .min(now.plus(profile.identity_lifetime));
        let scope = Boundary {
            actions: boundary.actions.clone(),
            resources: boundary.resources.clone(),
            validity: ValidityWindow::new(not_before, not_after)?,
            obligations: boundary.obligations.clone(),
        };

        if !boundary_contains(&scope, boundary) {
            return Err(Error::BoundaryViolation(format!(
                "issued scope escapes proof boundary for {}",
                proof.proof_id
            )));
        }

        let identity_id = format!("ei-{}", proof.mutation.intent_id);
        Ok(ExecutionIdentity {
            identity_id: identity_id.clone(),
            scope,
            lineage: Lineage {
                proof_hash: proof.proof_hash,
                attestation_digest: canonical_digest(&attestations)?,
                profile_id: profile.profile_id.clone(),
                decision_digest: canonical_digest(decision)?,
            },
            issued_at: now,
            issuer: self.issuer.clone(),
            non_transferable_binding: self.binding_for(&identity_id),
        })
    }

    /// The identity's effective boundary.
    pub fn scope<'a>(&self, identity: &'a ExecutionIdentity) -> &'a Boundary {
        &identity.scope
    }

    /// Check one attempt against an identity: run binding, validity
    /// window, action class, resource set, and every obligation against
    /// current signals. Fills in the obligation evidence it observed.
    pub fn validate_attempt(
        &self,
        identity: &ExecutionIdentity,
        attempt: &MutationAttempt,
        now: LogicalTime,
        signals: &ObligationSignals,
    ) -> AttemptValidation {
        if attempt.identity_id != identity.identity_id
            || identity.non_transferable_binding != self.binding_for(&identity.identity_id)
        {
            return AttemptValidation::refused(
                OutcomeStatus::RefusedBoundary,
                "identity binding does not match this run",
            );
        }
        if !identity.scope.validity.contains_time(now) {
            return AttemptValidation::refused(
                OutcomeStatus::RefusedExpired,
                "attempt outside the validity window",
            );
        }
        if !identity.scope.actions.contains(&attempt.action) {
            return AttemptValidation::refused(
                OutcomeStatus::RefusedBoundary,
                "action outside the identity scope",
            );
        }
        let all_resources_in_scope = attempt
            .resources
            .iter()
            .all(|r| identity.scope.resources.contains(r));
        if !all_resources_in_scope {
            return AttemptValidation::refused(
                OutcomeStatus::RefusedBoundary,
                "resource outside the identity scope",
            );
        }

        let mut evidence = BTreeMap::new();
        let mut failed: Option<String> = None;
        for obligation in &identity.scope.obligations {
            let observation = signals.observe(obligation, &attempt.resources, now);
            if !observation.held && failed.is_none() {
                failed = Some(obligation.clone());
            }
            evidence.insert(obligation.clone(), observation);
        }
        if let Some(obligation) = failed {
            return AttemptValidation {
                valid: false,
                refusal: Some(OutcomeStatus::RefusedObligation),
                reason: Some(format!("obligation {obligation} did not hold")),
                obligation_evidence: evidence,
            };
        }

        AttemptValidation {
            valid: true,
            refusal: None,
            reason: None,
            obligation_evidence: evidence,
        }
    }

    /// Validate immediately before the substrate call, then execute.
    ///
    /// Returns the attempt enriched with the obligation evidence that was
    /// actually observed, plus the outcome. Refusals change no state.
    pub fn execute(
        &self,
        identity: &ExecutionIdentity,
        mut attempt: MutationAttempt,
        substrate: &mut SubstrateStub,
        signals: &ObligationSignals,
        now: LogicalTime,
    ) -> (MutationAttempt, Outcome) {
        let validation = self.validate_attempt(identity, &attempt, now, signals);
        attempt.obligation_evidence = validation.obligation_evidence.clone();
        if !validation.valid {
            let status = validation
                .refusal
                .unwrap_or(OutcomeStatus::RefusedBoundary);
            return (attempt, Outcome::terminal(status, now));
        }
        match substrate.apply(&attempt, now) {
            Ok(receipt) => (
                attempt,
                Outcome {
                    status: OutcomeStatus::Executed,
                    substrate_receipt: Some(receipt),
                    observed_at: now,
                },
            ),
            Err(_) => (attempt, Outcome::terminal(OutcomeStatus::SubstrateError, now)),
        }
    }
}

/// Result of validating one attempt.
#[derive(Debug, Clone)]
pub struct AttemptValidation {
    pub valid: bool,
    pub refusal: Option<OutcomeStatus>,
    pub reason: Option<String>,
    pub obligation_evidence: BTreeMap<String, ObligationObservation>,
}

impl AttemptValidation {
    fn refused(status: OutcomeStatus, reason: &str) -> Self {
        AttemptValidation {
            valid: false,
            refusal: Some(status),
            reason: Some(reason.to_string()),
            obligation_evidence: BTreeMap::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Obligation signals
// ---------------------------------------------------------------------------

/// Live signals obligations are checked against: per-resource busy-traffic
/// intervals and global incident intervals, over logical time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ObligationSignals {
    /// resource → intervals (closed) during which it carries traffic.
    pub traffic_busy: BTreeMap<ResourceId, Vec<(u64, u64)>>,
    /// Intervals (closed) during which an incident is active.
    pub incident_active: Vec<(u64, u64)>,
}

impl ObligationSignals {
    fn traffic_free(&self, resource: &ResourceId, now: LogicalTime) -> bool {
        self.traffic_busy
            .get(resource)
            .map(|intervals| {
                !intervals
                    .iter()
                    .any(|(from, to)| *from <= now.ticks() && now.ticks() <= *to)
            })
            .unwrap_or(true)
    }

    fn incident_now(&self, now: LogicalTime) -> bool {
        self.incident_active
            .iter()
            .any(|(from, to)| *from <= now.ticks() && now.ticks() <= *to)
    }

    /// Observe one named obligation. Unknown obligations fail closed.
    pub fn observe(
        &self,
        obligation: &str,
        resources: &[ResourceId],
        now: LogicalTime,
    ) -> ObligationObservation {
        match obligation {
            "no-active-traffic" => ObligationObservation {
                held: resources.iter().all(|r| self.traffic_free(r, now)),
                source: "traffic-signals".into(),
            },
            "incident-active" => ObligationObservation {
                held: self.incident_now(now),
                source: "incident-signals".into(),
            },
            _ => ObligationObservation {
                held: false,
                source: "unknown-obligation".into(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Substrate stub
// ---------------------------------------------------------------------------

/// Per-resource state in the stub inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceState {
    Running,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRecord {
    pub state: ResourceState,
    pub config_version: u32,
    pub restarts: u32,
}

impl Default for ResourceRecord {
    fn default() -> Self {
        ResourceRecord {
            state: ResourceState::Running,
            config_version: 1,
            restarts: 0,
        }
    }
}

/// One executed mutation in the substrate's own log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionLogEntry {
    pub attempt_id: String,
    pub action: String,
    pub resources: Vec<ResourceId>,
    pub at: LogicalTime,
    pub receipt: Digest256,
}

/// In-process stand-in for the governed mutation substrate. Mutations
/// reach it only through the broker's `execute`, so every applied change
/// was validated against an issued identity.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SubstrateStub {
    pub inventory: BTreeMap<ResourceId, ResourceRecord>,
    pub execution_log: Vec<ExecutionLogEntry>,
}

#[derive(Serialize)]
struct ReceiptBody<'a> {
    attempt_id: &'a str,
    action: &'a str,
    resources: &'a [ResourceId],
    post_states: Vec<(&'a ResourceId, &'a ResourceRecord)>,
    at: LogicalTime,
}

impl SubstrateStub {
    pub fn with_inventory(resources: impl IntoIterator<Item = ResourceId>) -> Self {
        SubstrateStub {
            inventory: resources
                .into_iter()
                .map(|r| (r, ResourceRecord::default()))
                .collect(),
            execution_log: Vec::new(),
        }
    }

    /// Apply a broker-validated attempt. Not public: the broker is the
    /// only mutation path.
    pub(crate) fn apply(
        &mut self,
        attempt: &MutationAttempt,
        now: LogicalTime,
    ) -> std::result::Result<Digest256, String> {
        // Check all targets before mutating any, so failures change nothing.
        for resource in &attempt.resources {
            let record = self
                .inventory
                .get(resource)
                .ok_or_else(|| format!("unknown resource {resource}"))?;
            if record.state == ResourceState::Terminated {
                return Err(format!("resource {resource} already terminated"));
            }
        }
        for resource in &attempt.resources {
            let record = self.inventory.get_mut(resource).expect("checked above");
            match attempt.action.as_str() {
                "TerminateInstance" => record.state = ResourceState::Terminated,
                "UpdateConfig" => record.config_version += 1,
                "RestartService" => record.restarts += 1,
                other => return Err(format!("substrate cannot apply action {other}")),
            }
        }
        let post_states: Vec<(&ResourceId, &ResourceRecord)> = attempt
            .resources
            .iter()
            .map(|r| (r, self.inventory.get(r).expect("checked above")))
            .collect();
        let receipt = canonical_digest(&ReceiptBody {
            attempt_id: &attempt.attempt_id,
            action: attempt.action.as_str(),
            resources: &attempt.resources,
            post_states,
            at: now,
        })
        .map_err(|e| e.to_string())?;
        self.execution_log.push(ExecutionLogEntry {
            attempt_id: attempt.attempt_id.clone(),
            action: attempt.action.as_str().to_string(),
            resources: attempt.resources.clone(),
            at: now,
            receipt,
        });
        Ok(receipt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::{decide, ConsensusInput};
    use crate::engine;
    use crate::harness::fixtures;
    use crate::model::{DecisionBasis, RawIntent, Verdict};
    use std::time::Duration;

    struct Approved {
        proof: JustificationProof,
        slots: Vec<AttestationSlot>,
        profile: GovernanceMetadata,
        decision: Decision,
        broker: ExecutionBroker,
        substrate: SubstrateStub,
        signals: ObligationSignals,
    }

    fn approved_termination(target: &str, params: &[(&str, &str)]) -> Approved {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let swarm = fixtures::swarm(7);
        let profiles = fixtures::governance_profiles();
        let sources = world.context_sources(Default::default());
        let raw = RawIntent {
            intent_id: "i-brk".into(),
            action: "TerminateInstance".into(),
            targets: vec![target.into()],
            parameters: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(100),
        };
        let proof = engine::construct_proof(
            &raw,
            &fixtures::alias_table(),
            &sources,
            &bundle,
            LogicalTime(100),
        )
        .unwrap();
        let slots = crate::swarm::collect_attestations(
            &proof,
            &swarm,
            &Default::default(),
            Duration::from_secs(2),
            LogicalTime(101),
        );
        let profile = profiles
            .get(&proof.risk.required_profile)
            .expect("profile exists")
            .clone();
        let decision = decide(&ConsensusInput {
            slots: slots.clone(),
            profile: profile.clone(),
            proof_freshness: 1,
        });
        assert_eq!(decision.verdict, Verdict::Approve, "fixture must approve");
        Approved {
            proof,
            slots,
            profile,
            decision,
            broker: ExecutionBroker::new("broker-test", crate::digest::hash(b"run")),
            substrate: SubstrateStub::with_inventory(world.all_resources()),
            signals: world.obligation_signals(),
        }
    }

    fn attempt_for(identity: &ExecutionIdentity, action: &str, target: &str, at: u64) -> MutationAttempt {
        MutationAttempt {
            attempt_id: "x-1".into(),
            identity_id: identity.identity_id.clone(),
            action: action.into(),
            resources: vec![target.into()],
            attempted_at: LogicalTime(at),
            obligation_evidence: BTreeMap::new(),
        }
    }

    #[test]
    fn approved_termination_issues_scoped_identity() {
        let a = approved_termination("inst-0000", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        assert_eq!(identity.scope.actions.len(), 1);
        assert!(identity
            .scope
            .actions
            .contains(&crate::model::ActionClass::from("TerminateInstance")));
        assert_eq!(identity.scope.resources.len(), 1);
        // High-risk profile: 300-tick lifetime, clipped to the proof window.
        assert_eq!(
            identity.scope.validity.not_after.ticks() - identity.issued_at.ticks(),
            298, // proof window [100, 400] clips the 300-tick lifetime at t=102
        );
        assert!(boundary_contains(&identity.scope, &a.proof.boundary));
        assert_eq!(identity.lineage.proof_hash, a.proof.proof_hash);
    }

    #[test]
    fn break_glass_identity_is_strictly_narrower() {
        let a = approved_termination("inst-0001", &[("break_glass", "true")]);
        assert_eq!(a.profile.profile_id.as_str(), "break_glass");
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        // 120-tick break-glass lifetime, strictly inside the proof window.
        assert_eq!(identity.scope.validity.not_after, LogicalTime(222));
        assert!(boundary_contains(&identity.scope, &a.proof.boundary));
        assert_ne!(identity.scope.validity, a.proof.boundary.validity);
    }

    #[test]
    fn non_approve_decision_refuses_issuance() {
        let a = approved_termination("inst-0002", &[]);
        let escalated = Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::DefaultEscalate,
        };
        let err = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &escalated, LogicalTime(102))
            .unwrap_err();
        assert!(matches!(err, Error::IssuanceRefused(_)));
    }

    #[test]
    fn valid_attempt_executes_and_mutates_inventory() {
        let mut a = approved_termination("inst-0003", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        let attempt = attempt_for(&identity, "TerminateInstance", "inst-0003", 103);
        let (recorded, outcome) = a.broker.execute(
            &identity,
            attempt,
            &mut a.substrate,
            &a.signals,
            LogicalTime(103),
        );
        assert_eq!(outcome.status, OutcomeStatus::Executed);
        assert!(outcome.substrate_receipt.is_some());
        assert_eq!(
            a.substrate.inventory[&ResourceId::from("inst-0003")].state,
            ResourceState::Terminated
        );
        assert!(recorded.obligation_evidence["no-active-traffic"].held);
    }

    #[test]
    fn expired_attempt_is_refused_without_state_change() {
        let mut a = approved_termination("inst-0004", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        let after_expiry = identity.scope.validity.not_after.ticks() + 1;
        let attempt = attempt_for(&identity, "TerminateInstance", "inst-0004", after_expiry);
        let (_, outcome) = a.broker.execute(
            &identity,
            attempt,
            &mut a.substrate,
            &a.signals,
            LogicalTime(after_expiry),
        );
        assert_eq!(outcome.status, OutcomeStatus::RefusedExpired);
        assert_eq!(
            a.substrate.inventory[&ResourceId::from("inst-0004")].state,
            ResourceState::Running
        );
    }

    #[test]
    fn cross_resource_attempt_is_refused() {
        let mut a = approved_termination("inst-0005", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        let attempt = attempt_for(&identity, "TerminateInstance", "inst-0006", 103);
        let (_, outcome) = a.broker.execute(
            &identity,
            attempt,
            &mut a.substrate,
            &a.signals,
            LogicalTime(103),
        );
        assert_eq!(outcome.status, OutcomeStatus::RefusedBoundary);
    }

    #[test]
    fn failed_obligation_refuses_without_state_change() {
        let mut a = approved_termination("inst-0007", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        // Traffic appears between approval and execution.
        a.signals
            .traffic_busy
            .insert(ResourceId::from("inst-0007"), vec![(0, u64::MAX)]);
        let attempt = attempt_for(&identity, "TerminateInstance", "inst-0007", 103);
        let (recorded, outcome) = a.broker.execute(
            &identity,
            attempt,
            &mut a.substrate,
            &a.signals,
            LogicalTime(103),
        );
        assert_eq!(outcome.status, OutcomeStatus::RefusedObligation);
        assert!(!recorded.obligation_evidence["no-active-traffic"].held);
        assert_eq!(
            a.substrate.inventory[&ResourceId::from("inst-0007")].state,
            ResourceState::Running
        );
    }

    #[test]
    fn identity_from_another_run_is_refused() {
        let mut a = approved_termination("inst-0008", &[]);
        let identity = a
            .broker
            .derive_identity(&a.proof, &a.slots, &a.profile, &a.decision, LogicalTime(102))
            .unwrap();
        let other_broker =
            ExecutionBroker::new("broker-test", crate::digest::hash(b"a different run"));
        let attempt = attempt_for(&identity, "TerminateInstance", "inst-0008", 103);
        let (_, outcome) = other_broker.execute(
            &identity,
            attempt,
            &mut a.substrate,
            &a.signals,
            LogicalTime(103),
        );
        assert_eq!(outcome.status, OutcomeStatus::RefusedBoundary);
    }
}
