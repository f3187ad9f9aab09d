//! The five evaluator classes.
//!
//! Each evaluator is a pure function of the proof and its own fixture
//! state. The decision rules below are deliberately small and documented
//! so workload outcomes are deterministic; what matters architecturally
//! is that the classes fail differently, and that no single one of them
//! can mint authority.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::canonical::canonical_digest;
use crate::digest::Digest256;
use crate::model::{
    ActionClass, Annotations, AttestationDecision, ContextValue, FactDomain, JustificationProof,
    ResourceId, RiskClass,
};

/// Class-specific judgment over a hash-verified proof.
pub trait EvaluatorBehavior: Send + Sync {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations);
}

// ---------------------------------------------------------------------------
// Policy class
// ---------------------------------------------------------------------------

/// Checks the explicit governance rules: the proof must be grounded in
/// the bundle version this evaluator was configured with, must carry an
/// issuable boundary, and must not target a protected resource without
/// explicit authorization.
pub struct PolicyEvaluator {
    pub bundle_version: String,
    pub bundle_digest: Digest256,
    /// Intent parameter that authorizes protected-resource mutation.
    pub protected_authorization_parameter: String,
}

impl EvaluatorBehavior for PolicyEvaluator {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations) {
        let basis = &proof.policy_basis;
        if basis.bundle_version != self.bundle_version || basis.bundle_digest != self.bundle_digest
        {
            // The rule set is outside this evaluator's bundle version:
            // it cannot judge, and says so.
            return (
                AttestationDecision::Abstain,
                Annotations::objection("BUNDLE_VERSION_MISMATCH"),
            );
        }
        if basis.deny_by_default() || !proof.boundary.issuable() {
            return (
                AttestationDecision::Reject,
                Annotations::objection("NO_ISSUABLE_BOUNDARY"),
            );
        }
        if proof.risk.risk_class == RiskClass::Protected
            && !proof
                .mutation
                .has_parameter(&self.protected_authorization_parameter)
        {
            return (
                AttestationDecision::Reject,
                Annotations::objection("PROTECTED_RESOURCE"),
            );
        }
        (AttestationDecision::Approve, Annotations::default())
    }
}

// ---------------------------------------------------------------------------
// State class
// ---------------------------------------------------------------------------

/// Checks topology, dependency, and freshness: absent context, stale
/// snapshots, and targets on recorded dependency paths are all grounds
/// to reject.
pub struct StateEvaluator {
    /// Maximum acceptable snapshot age, in ticks, relative to proof
    /// construction time.
    pub freshness_window: u64,
}

impl EvaluatorBehavior for StateEvaluator {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations) {
        if proof.snapshot.domain_absent(FactDomain::Dependencies) {
            return (
                AttestationDecision::Reject,
                Annotations::objection("MISSING_DEPENDENCY_CONTEXT"),
            );
        }
        for domain in FactDomain::ALL {
            if proof.snapshot.domain_absent(domain) {
                return (
                    AttestationDecision::Reject,
                    Annotations::objection(&format!(
                        "MISSING_CONTEXT_{}",
                        domain.as_str().to_uppercase()
                    )),
                );
            }
        }
        let age = proof.constructed_at.age_of(proof.snapshot.freshness());
        if age > self.freshness_window {
            return (
                AttestationDecision::Reject,
                Annotations::objection("STALE_STATE"),
            );
        }
        let on_dependency_path = proof
            .snapshot
            .domain_bindings(FactDomain::Dependencies)
            .any(|b| matches!(&b.value, ContextValue::List(deps) if !deps.is_empty()));
        if on_dependency_path {
            return (
                AttestationDecision::Reject,
                Annotations::objection("ON_DEPENDENCY_PATH"),
            );
        }
        (AttestationDecision::Approve, Annotations::default())
    }
}

// ---------------------------------------------------------------------------
// Risk class
// ---------------------------------------------------------------------------

/// Blast-radius and reversibility limits per risk class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskEvaluatorConfig {
    /// Maximum resources one approval may expose, per risk class.
    pub blast_radius_caps: BTreeMap<RiskClass, usize>,
    /// Risk classes allowed to run irreversible actions at all.
    pub irreversible_allowed: BTreeSet<RiskClass>,
    /// Actions considered irreversible.
    pub irreversible_actions: BTreeSet<ActionClass>,
}

pub struct RiskEvaluator {
    pub config: RiskEvaluatorConfig,
}

impl EvaluatorBehavior for RiskEvaluator {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations) {
        let cap = self
            .config
            .blast_radius_caps
            .get(&proof.risk.risk_class)
            .copied()
            .unwrap_or(1);
        if proof.boundary.resources.len() > cap {
            return (
                AttestationDecision::Reject,
                Annotations::objection("BLAST_RADIUS"),
            );
        }
        let irreversible = self
            .config
            .irreversible_actions
            .contains(&proof.mutation.action);
        if irreversible
            && !self
                .config
                .irreversible_allowed
                .contains(&proof.risk.risk_class)
        {
            return (
                AttestationDecision::Reject,
                Annotations::objection("IRREVERSIBLE_ACTION"),
            );
        }
        (AttestationDecision::Approve, Annotations::default())
    }
}

// ---------------------------------------------------------------------------
// Simulation class
// ---------------------------------------------------------------------------

/// Fixture world model the simulation evaluator replays mutations against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldModel {
    /// Resources the model routes live traffic through.
    pub routes_traffic: BTreeSet<ResourceId>,
    /// Resources under a protected invariant.
    pub protected: BTreeSet<ResourceId>,
    /// Actions the model treats as removing the resource.
    pub destructive_actions: BTreeSet<ActionClass>,
}

#[derive(Serialize)]
struct PredictedEffect<'a> {
    action: &'a ActionClass,
    transitions: Vec<(&'a ResourceId, &'static str)>,
}

impl WorldModel {
    /// Replay the mutation: predict each target's post-state and report
    /// which invariants the prediction violates.
    pub fn simulate(&self, proof: &JustificationProof) -> (Digest256, Vec<String>) {
        let destructive = self.destructive_actions.contains(&proof.mutation.action);
        let mut violations = Vec::new();
        let mut transitions = Vec::new();
        for target in &proof.mutation.targets {
            let post_state = if destructive { "removed" } else { "mutated" };
            transitions.push((target, post_state));
            if destructive && self.routes_traffic.contains(target) {
                violations.push("TRAFFIC_IMPACT".to_string());
            }
            if self.protected.contains(target) {
                violations.push("PROTECTED_INVARIANT".to_string());
            }
        }
        violations.sort();
        violations.dedup();
        let digest = canonical_digest(&PredictedEffect {
            action: &proof.mutation.action,
            transitions,
        })
        .expect("predicted effects are always canonical-serializable");
        (digest, violations)
    }
}

pub struct SimulationEvaluator {
    pub world: Arc<WorldModel>,
}

impl EvaluatorBehavior for SimulationEvaluator {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations) {
        let (digest, violations) = self.world.simulate(proof);
        let decision = if violations.is_empty() {
            AttestationDecision::Approve
        } else {
            AttestationDecision::Reject
        };
        (
            decision,
            Annotations {
                objections: violations,
                predicted_effect: Some(digest),
                ..Annotations::default()
            },
        )
    }
}

// ---------------------------------------------------------------------------
// Human-escalation class
// ---------------------------------------------------------------------------

/// Pass-through adapter for queued human verdicts. A verdict queued for
/// this proof hash is emitted as a signed attestation; with nothing
/// queued the adapter abstains, so the pipeline never blocks on a human.
pub struct HumanEscalationAdapter {
    /// proof hash (hex) → queued verdict.
    pub queued_verdicts: BTreeMap<String, AttestationDecision>,
}

impl EvaluatorBehavior for HumanEscalationAdapter {
    fn judge(&self, proof: &JustificationProof) -> (AttestationDecision, Annotations) {
        match self.queued_verdicts.get(&proof.proof_hash.to_hex()) {
            Some(decision) => (*decision, Annotations::objection("QUEUED_VERDICT")),
            None => (AttestationDecision::Abstain, Annotations::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::harness::fixtures;
    use crate::model::RawIntent;
    use crate::time::LogicalTime;

    fn proof(action: &str, target: &str) -> JustificationProof {
        let world = fixtures::WorldFixture::small();
        let sources = world.context_sources(Default::default());
        let raw = RawIntent {
            intent_id: "i-ev".into(),
            action: action.into(),
            targets: vec![target.into()],
            parameters: Default::default(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(10),
        };
        engine::construct_proof(
            &raw,
            &fixtures::alias_table(),
            &sources,
            &fixtures::policy_bundle(),
            LogicalTime(10),
        )
        .unwrap()
    }

    #[test]
    fn policy_approves_in_policy_destructive_action() {
        let p = proof("TerminateInstance", "inst-0000");
        let evaluator = fixtures::policy_evaluator();
        assert_eq!(evaluator.judge(&p).0, AttestationDecision::Approve);
    }

    #[test]
    fn policy_rejects_empty_boundary() {
        let p = proof("UnknownAction", "inst-0000");
        let evaluator = fixtures::policy_evaluator();
        let (decision, notes) = evaluator.judge(&p);
        assert_eq!(decision, AttestationDecision::Reject);
        assert_eq!(notes.objections, vec!["NO_ISSUABLE_BOUNDARY"]);
    }

    #[test]
    fn policy_abstains_on_unknown_bundle_version() {
        let p = proof("TerminateInstance", "inst-0000");
        let evaluator = PolicyEvaluator {
            bundle_version: "some-other-version".into(),
            bundle_digest: crate::digest::hash(b"other"),
            protected_authorization_parameter: "change_ticket".into(),
        };
        assert_eq!(evaluator.judge(&p).0, AttestationDecision::Abstain);
    }

    #[test]
    fn state_rejects_missing_dependency_context() {
        let world = fixtures::WorldFixture::small();
        let mut faults = BTreeMap::new();
        faults.insert(FactDomain::Dependencies, engine::SourceFault::Missing);
        let sources = world.context_sources(faults);
        let raw = RawIntent {
            intent_id: "i-ev".into(),
            action: "TerminateInstance".into(),
            targets: vec!["inst-0000".into()],
            parameters: Default::default(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(10),
        };
        let p = engine::construct_proof(
            &raw,
            &fixtures::alias_table(),
            &sources,
            &fixtures::policy_bundle(),
            LogicalTime(10),
        )
        .unwrap();
        let (decision, notes) = StateEvaluator { freshness_window: 60 }.judge(&p);
        assert_eq!(decision, AttestationDecision::Reject);
        assert_eq!(notes.objections, vec!["MISSING_DEPENDENCY_CONTEXT"]);
    }

    #[test]
    fn state_rejects_stale_snapshot() {
        let world = fixtures::WorldFixture::small();
        let mut faults = BTreeMap::new();
        for domain in FactDomain::ALL {
            faults.insert(domain, engine::SourceFault::Stale);
        }
        let sources = world.context_sources(faults);
        let raw = RawIntent {
            intent_id: "i-ev".into(),
            action: "TerminateInstance".into(),
            targets: vec!["inst-0000".into()],
            parameters: Default::default(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(500),
        };
        let p = engine::construct_proof(
            &raw,
            &fixtures::alias_table(),
            &sources,
            &fixtures::policy_bundle(),
            LogicalTime(500),
        )
        .unwrap();
        let (decision, notes) = StateEvaluator { freshness_window: 60 }.judge(&p);
        assert_eq!(decision, AttestationDecision::Reject);
        assert_eq!(notes.objections, vec!["STALE_STATE"]);
    }

    #[test]
    fn state_approves_fresh_dependency_free_target() {
        let p = proof("TerminateInstance", "inst-0000");
        let (decision, _) = StateEvaluator { freshness_window: 60 }.judge(&p);
        assert_eq!(decision, AttestationDecision::Approve);
    }

    #[test]
    fn risk_cap_boundary_cases() {
        let evaluator = fixtures::risk_evaluator();
        // Single resource under the high-risk cap of 1: exactly at cap.
        let p = proof("TerminateInstance", "inst-0000");
        assert_eq!(evaluator.judge(&p).0, AttestationDecision::Approve);

        // Three resources under a cap of 1: over.
        let world = fixtures::WorldFixture::small();
        let sources = world.context_sources(Default::default());
        let raw = RawIntent {
            intent_id: "i-ev".into(),
            action: "TerminateInstance".into(),
            targets: vec!["inst-0000".into(), "inst-0001".into(), "inst-0002".into()],
            parameters: Default::default(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(10),
        };
        let wide = engine::construct_proof(
            &raw,
            &fixtures::alias_table(),
            &sources,
            &fixtures::policy_bundle(),
            LogicalTime(10),
        )
        .unwrap();
        let (decision, notes) = evaluator.judge(&wide);
        assert_eq!(decision, AttestationDecision::Reject);
        assert_eq!(notes.objections, vec!["BLAST_RADIUS"]);
    }

    #[test]
    fn simulation_rejects_traffic_routing_target() {
        let world = fixtures::WorldFixture::small();
        let router = world.traffic_routers()[0].as_str().to_string();
        let p = proof("TerminateInstance", &router);
        let evaluator = SimulationEvaluator {
            world: Arc::new(world.world_model()),
        };
        let (decision, notes) = evaluator.judge(&p);
        assert_eq!(decision, AttestationDecision::Reject);
        assert!(notes.objections.contains(&"TRAFFIC_IMPACT".to_string()));
    }

    #[test]
    fn simulation_double_run_digests_agree() {
        let world = fixtures::WorldFixture::small();
        let model = world.world_model();
        let p = proof("TerminateInstance", "inst-0000");
        let (first, _) = model.simulate(&p);
        let (second, _) = model.simulate(&p);
        assert_eq!(first, second);
    }

    #[test]
    fn human_adapter_passes_through_queued_verdict_else_abstains() {
        let p = proof("TerminateInstance", "inst-0000");
        let mut queued = BTreeMap::new();
        queued.insert(p.proof_hash.to_hex(), AttestationDecision::Approve);
        let adapter = HumanEscalationAdapter {
            queued_verdicts: queued,
        };
        assert_eq!(adapter.judge(&p).0, AttestationDecision::Approve);

        let empty = HumanEscalationAdapter {
            queued_verdicts: BTreeMap::new(),
        };
        assert_eq!(empty.judge(&p).0, AttestationDecision::Abstain);
    }
}
