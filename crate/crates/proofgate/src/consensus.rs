//! The consensus rule: attestations + governance metadata → decision.
//!
//! Branch order is deliberate. Rejection (veto or threshold) is the most
//! conservative terminal outcome and is checked first, so a veto wins
//! even over a stale proof. The escalate triggers (missing required
//! class, staleness, malformed required-class output, signature
//! shortfall) sit between rejection and approval: nothing malformed or
//! missing can silently become approval. Approval requires quorum and
//! class diversity together; everything else escalates.
//!
//! Malformed attestations never count as approvals or rejections. They
//! were discarded at collection; here they only matter as evidence that
//! a required class failed to produce a usable judgment.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::model::{
    AttestationDecision, AttestationOutcome, AttestationSlot, Decision, DecisionBasis,
    EvaluatorClass, GovernanceMetadata, Verdict,
};

/// Everything the consensus rule sees for one proof.
///
/// Approver and rejecter tallies are derived here on the fly; they are
/// never stored state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusInput {
    /// One slot per registered evaluator, including malformed and
    /// timed-out markers.
    pub slots: Vec<AttestationSlot>,
    pub profile: GovernanceMetadata,
    /// Age of the bound snapshot at decision time, in ticks.
    pub proof_freshness: u64,
}

impl ConsensusInput {
    fn approvers(&self) -> impl Iterator<Item = &AttestationSlot> {
        self.slots
            .iter()
            .filter(|s| s.decision() == Some(AttestationDecision::Approve))
    }

    fn rejecters(&self) -> impl Iterator<Item = &AttestationSlot> {
        self.slots
            .iter()
            .filter(|s| s.decision() == Some(AttestationDecision::Reject))
    }
}

/// Compute the decision. Every input maps to a decision; there is no
/// error path.
pub fn decide(input: &ConsensusInput) -> Decision {
    let profile = &input.profile;

    // (1) Rejection: veto first, then the rejection threshold.
    let veto_fired = input
        .rejecters()
        .any(|s| profile.veto_evaluators.contains(&s.evaluator_id));
    if veto_fired {
        return Decision {
            verdict: Verdict::Reject,
            basis: DecisionBasis::Veto,
        };
    }
    if input.rejecters().count() >= profile.rejection_threshold as usize {
        return Decision {
            verdict: Verdict::Reject,
            basis: DecisionBasis::RejectionThreshold,
        };
    }

    // (2) Escalation triggers, in declaration order.
    let present_classes: BTreeSet<EvaluatorClass> = input
        .slots
        .iter()
        .filter(|s| s.signed().is_some())
        .map(|s| s.evaluator_class)
        .collect();
    if profile
        .required_classes
        .iter()
        .any(|class| !present_classes.contains(class))
    {
        return Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::MissingClass,
        };
    }
    if input.proof_freshness > profile.freshness_window {
        return Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::FreshnessFailure,
        };
    }
    let malformed_required = input.slots.iter().any(|s| {
        matches!(s.outcome, AttestationOutcome::Malformed { .. })
            && profile.required_classes.contains(&s.evaluator_class)
    });
    if malformed_required {
        return Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::MalformedRequiredClass,
        };
    }
    let valid_signatures = input.slots.iter().filter(|s| s.signed().is_some()).count();
    if valid_signatures < profile.signature_threshold as usize {
        return Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::SignatureThreshold,
        };
    }

    // (3) Approval: quorum and diversity together.
    let approvals = input.approvers().count();
    let approving_classes: BTreeSet<EvaluatorClass> =
        input.approvers().map(|s| s.evaluator_class).collect();
    if approvals >= profile.quorum as usize {
        if approving_classes.len() >= profile.min_distinct_approving_classes as usize {
            return Decision {
                verdict: Verdict::Approve,
                basis: DecisionBasis::Quorum,
            };
        }
        return Decision {
            verdict: Verdict::Escalate,
            basis: DecisionBasis::DiversityFailure,
        };
    }

    // (4) Otherwise.
    Decision {
        verdict: Verdict::Escalate,
        basis: DecisionBasis::DefaultEscalate,
    }
}

/// Issuance readiness: true iff the decision is approve.
pub fn ready(input: &ConsensusInput) -> bool {
    decide(input).verdict == Verdict::Approve
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::EvaluatorKey;
    use crate::digest::hash;
    use crate::model::{Annotations, Attestation, EvaluatorId, ProfileId};
    use crate::time::LogicalTime;

    fn slot(
        id: &str,
        class: EvaluatorClass,
        decision: Option<AttestationDecision>,
    ) -> AttestationSlot {
        let outcome = match decision {
            Some(d) => {
                let key = EvaluatorKey::derive(99, id);
                AttestationOutcome::Signed {
                    attestation: Attestation::signed(
                        EvaluatorId::from(id),
                        class,
                        hash(b"proof"),
                        d,
                        Annotations::default(),
                        LogicalTime(1),
                        &key,
                    ),
                }
            }
            None => AttestationOutcome::Malformed {
                raw_digest: hash(b"garbage"),
                reason: "test".into(),
            },
        };
        AttestationSlot {
            evaluator_id: EvaluatorId::from(id),
            evaluator_class: class,
            outcome,
        }
    }

    fn profile(k: u32, r: u32, d: u32) -> GovernanceMetadata {
        GovernanceMetadata {
            profile_id: ProfileId::from("low"),
            quorum: k,
            rejection_threshold: r,
            veto_evaluators: BTreeSet::new(),
            required_classes: [EvaluatorClass::Policy, EvaluatorClass::State].into(),
            min_distinct_approving_classes: d,
            freshness_window: 60,
            signature_threshold: 3,
            identity_lifetime: 300,
        }
    }

    use AttestationDecision::{Abstain, Approve, Reject};
    use EvaluatorClass::{HumanEscalation, Policy, Risk, State};

    #[test]
    fn low_risk_three_approvals_from_two_classes_approves() {
        let input = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Approve)),
                slot("policy-2", Policy, Some(Approve)),
                slot("state-1", State, Some(Approve)),
            ],
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Approve);
        assert_eq!(decision.basis, DecisionBasis::Quorum);
    }

    #[test]
    fn veto_reject_wins_regardless_of_approvals() {
        let mut p = profile(3, 5, 2);
        p.veto_evaluators.insert(EvaluatorId::from("human-1"));
        let input = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Approve)),
                slot("policy-2", Policy, Some(Approve)),
                slot("state-1", State, Some(Approve)),
                slot("risk-1", Risk, Some(Approve)),
                slot("human-1", HumanEscalation, Some(Reject)),
            ],
            profile: p,
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Reject);
        assert_eq!(decision.basis, DecisionBasis::Veto);
    }

    #[test]
    fn zero_attestations_escalates() {
        let input = ConsensusInput {
            slots: vec![],
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Escalate);
        assert_eq!(decision.basis, DecisionBasis::MissingClass);
    }

    #[test]
    fn stale_proof_escalates_but_rejection_still_wins() {
        let stale_quorum = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Approve)),
                slot("policy-2", Policy, Some(Approve)),
                slot("state-1", State, Some(Approve)),
            ],
            profile: profile(3, 2, 2),
            proof_freshness: 120,
        };
        assert_eq!(
            decide(&stale_quorum).basis,
            DecisionBasis::FreshnessFailure
        );

        let stale_rejected = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Reject)),
                slot("policy-2", Policy, Some(Reject)),
                slot("state-1", State, Some(Approve)),
            ],
            profile: profile(3, 2, 2),
            proof_freshness: 120,
        };
        let decision = decide(&stale_rejected);
        assert_eq!(decision.verdict, Verdict::Reject);
        assert_eq!(decision.basis, DecisionBasis::RejectionThreshold);
    }

    #[test]
    fn malformed_required_class_escalates_and_never_counts() {
        let input = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, None), // malformed
                slot("policy-2", Policy, Some(Approve)),
                slot("state-1", State, Some(Approve)),
                slot("state-2", State, Some(Approve)),
            ],
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Escalate);
        assert_eq!(decision.basis, DecisionBasis::MalformedRequiredClass);
    }

    #[test]
    fn diversity_floor_blocks_single_class_quorum() {
        let mut p = profile(3, 4, 2);
        p.required_classes = [Policy].into();
        let input = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Approve)),
                slot("policy-2", Policy, Some(Approve)),
                slot("policy-3", Policy, Some(Approve)),
                slot("state-1", State, Some(Abstain)),
            ],
            profile: p,
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Escalate);
        assert_eq!(decision.basis, DecisionBasis::DiversityFailure);
    }

    #[test]
    fn timed_out_required_class_escalates_as_missing() {
        let mut slots = vec![
            slot("policy-1", Policy, Some(Approve)),
            slot("policy-2", Policy, Some(Approve)),
            slot("risk-1", Risk, Some(Approve)),
        ];
        slots.push(AttestationSlot {
            evaluator_id: EvaluatorId::from("state-1"),
            evaluator_class: State,
            outcome: AttestationOutcome::TimedOut,
        });
        let input = ConsensusInput {
            slots,
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        let decision = decide(&input);
        assert_eq!(decision.verdict, Verdict::Escalate);
        assert_eq!(decision.basis, DecisionBasis::MissingClass);
    }

    #[test]
    fn ready_is_decide_equals_approve() {
        let approve = ConsensusInput {
            slots: vec![
                slot("policy-1", Policy, Some(Approve)),
                slot("policy-2", Policy, Some(Approve)),
                slot("state-1", State, Some(Approve)),
            ],
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        assert!(ready(&approve));

        let escalate = ConsensusInput {
            slots: vec![slot("policy-1", Policy, Some(Approve))],
            profile: profile(3, 2, 2),
            proof_freshness: 0,
        };
        assert!(!ready(&escalate));
    }
}
