//! The end-to-end governed pipeline over a scenario list.
//!
//! Each repetition replays the same scenario list with a fresh substrate,
//! ledger, and run token. Scenarios advance a logical clock in fixed
//! strides so lifecycles never overlap in time and reruns are
//! byte-identical. The single ledger appender receives events in scenario
//! order; evaluator fan-out inside a scenario is concurrent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use super::fixtures::{self, WorldFixture, DRIFT_DECOY_RESOURCE};
use super::metrics::{summarize_stage, MetricsReport, StageLatency};
use super::workload::{DriftKind, Scenario, UnsafeVariant};
use crate::broker::{ExecutionBroker, ObligationSignals, SubstrateStub};
use crate::consensus::{decide, ConsensusInput};
use crate::digest::hash;
use crate::engine::{construct_proof, AliasTable};
use crate::error::{Error, Result};
use crate::ledger::{
    ArtifactStores, AttestationsClosedPayload, EventKind, IdentityEventPayload, Ledger,
    OutcomePayload, ProofCreatedPayload,
};
use crate::model::{
    ActionClass, AttestationDecision, AttestationOutcome, AttestationSlot, Decision, DecisionBasis,
    EvaluatorId, GovernanceProfiles, IntentId, MutationAttempt, Outcome, OutcomeStatus,
    PolicyBundle, Verdict,
};
use crate::swarm::{collect_attestations, EvaluatorRegistration, FaultMode, Swarm};
use crate::time::LogicalTime;

/// Logical ticks between scenario base times; longer than any validity
/// window, so lifecycles never interleave.
const SCENARIO_STRIDE: u64 = 1_000;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Which pipeline component an ablated run removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    /// Route approval through a single evaluator instead of the rule.
    NoConsensus,
    /// Execute approved intents with standing authority; no identity,
    /// no attempt validation.
    NoExecutionIdentity,
    /// Disable the ledger; replay only from execution logs.
    NoEvidenceChain,
}

impl AblationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AblationKind::NoConsensus => "no_consensus",
            AblationKind::NoExecutionIdentity => "no_execution_identity",
            AblationKind::NoEvidenceChain => "no_evidence_chain",
        }
    }
}

impl std::str::FromStr for AblationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_consensus" => Ok(AblationKind::NoConsensus),
            "no_execution_identity" => Ok(AblationKind::NoExecutionIdentity),
            "no_evidence_chain" => Ok(AblationKind::NoEvidenceChain),
            other => Err(Error::Config(format!(
                "unknown ablation {other}; expected no_consensus, no_execution_identity, or no_evidence_chain"
            ))),
        }
    }
}

/// Immutable inputs shared by every repetition.
pub struct HarnessConfig {
    pub world: WorldFixture,
    pub bundle: PolicyBundle,
    pub aliases: AliasTable,
    pub profiles: GovernanceProfiles,
    pub registrations: Vec<EvaluatorRegistration>,
    pub queued_verdicts: BTreeMap<String, AttestationDecision>,
}

impl HarnessConfig {
    pub fn with_world(world: WorldFixture) -> Self {
        HarnessConfig {
            world,
            bundle: fixtures::policy_bundle(),
            aliases: fixtures::alias_table(),
            profiles: fixtures::governance_profiles(),
            registrations: fixtures::registry(),
            queued_verdicts: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.profiles.validate(self.registrations.len())?;
        let mut ids = BTreeSet::new();
        for reg in &self.registrations {
            if !ids.insert(&reg.evaluator_id) {
                return Err(Error::Config(format!(
                    "duplicate evaluator id {}",
                    reg.evaluator_id
                )));
            }
        }
        if self.bundle.rules.is_empty() {
            return Err(Error::Config("policy bundle has no rules".into()));
        }
        for rule in &self.bundle.rules {
            if self.profiles.get(&rule.required_profile).is_none() {
                return Err(Error::Config(format!(
                    "rule {} names unknown profile {}",
                    rule.rule_id, rule.required_profile
                )));
            }
        }
        Ok(())
    }
}

/// Per-run knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub seed: u64,
    pub repetitions: u32,
    /// Fraction of records whose external substrate receipt is dropped
    /// after execution. Injection is exact: `floor(n × rate)` records per
    /// repetition, chosen from the admissible pool by seed.
    pub receipt_loss_rate: f64,
    pub collection_deadline_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<AblationKind>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 7,
            repetitions: 5,
            receipt_loss_rate: 0.0,
            collection_deadline_ms: 2_000,
            ablation: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

/// In-memory counters kept alongside the ledger, used by the dual-path
/// metrics check and the ablation reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTally {
    pub records: u64,
    pub executed: u64,
    pub unsafe_total: u64,
    pub unsafe_blocked: u64,
    pub drift_total: u64,
    pub drift_refused: u64,
    pub drift_executed: u64,
    pub malformed_total: u64,
    pub malformed_admitted: u64,
    pub approvals: u64,
    pub rejects: u64,
    pub escalations: u64,
    /// Scope resource-set size per issued identity.
    pub approval_scope_sizes: Vec<u64>,
    pub receipts_dropped: u64,
}

/// A minimal operational log entry: what a plain execution log records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpsLogEntry {
    pub intent_id: IntentId,
    pub action: String,
    pub targets: Vec<String>,
    pub status: OutcomeStatus,
    pub at: LogicalTime,
}

/// Everything a run produces.
pub struct RunArtifacts {
    /// One ledger per repetition; empty under the no-evidence ablation.
    pub ledgers: Vec<Ledger>,
    pub report: MetricsReport,
    pub tally: RunTally,
    pub stores: ArtifactStores,
    /// Flat execution log across repetitions (always kept; it is the only
    /// audit surface under the no-evidence ablation).
    pub ops_log: Vec<OpsLogEntry>,
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

fn subseed(seed: u64, label: &str, rep: u32) -> u64 {
    let mut material = seed.to_be_bytes().to_vec();
    material.extend_from_slice(label.as_bytes());
    material.extend_from_slice(&rep.to_be_bytes());
    u64::from_be_bytes(hash(&material).as_bytes()[..8].try_into().expect("8 bytes"))
}

/// Run the governed pipeline over the scenario list for every repetition.
pub fn run_dtf(
    scenarios: &[Scenario],
    config: &HarnessConfig,
    options: &RunOptions,
) -> Result<RunArtifacts> {
    config.validate()?;
    if options.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }

    let swarm = fixtures::swarm_for(
        options.seed,
        &config.registrations,
        &config.bundle,
        &config.world,
        &config.queued_verdicts,
    );
    let mut stores = ArtifactStores {
        bundles: BTreeMap::new(),
        profiles: config.profiles.clone(),
        keys: swarm.key_registry.clone(),
    };
    stores.insert_bundle(config.bundle.clone());

    let mut ledgers = Vec::new();
    let mut tally = RunTally::default();
    let mut ops_log = Vec::new();
    let mut stage_samples: BTreeMap<&'static str, Vec<u64>> = BTreeMap::new();

    for rep in 0..options.repetitions {
        let mut rep_ctx = RepetitionContext::new(scenarios, config, options, &swarm, rep);
        for scenario in scenarios {
            rep_ctx.drive(scenario, &mut tally, &mut ops_log, &mut stage_samples)?;
        }
        if options.ablation != Some(AblationKind::NoEvidenceChain) {
            ledgers.push(rep_ctx.ledger);
        }
    }

    let latency = Some(
        ["proof_construction", "evaluation", "consensus", "issuance", "end_to_end"]
            .iter()
            .map(|stage| summarize_stage(stage, stage_samples.get(*stage).map_or(&[][..], |v| v)))
            .collect::<Vec<StageLatency>>(),
    );

    let mut report = if options.ablation == Some(AblationKind::NoEvidenceChain) {
        MetricsReport::from_tally_and_logs(&tally, &ops_log)
    } else {
        let mut r = super::metrics::compute_metrics(&ledgers, &stores)?;
        r.malformed_cases_admitted = tally.malformed_admitted;
        r
    };
    report.latency = latency;

    Ok(RunArtifacts {
        ledgers,
        report,
        tally,
        stores,
        ops_log,
    })
}

/// State for one repetition: fresh substrate, signals, ledger, broker.
struct RepetitionContext<'a> {
    config: &'a HarnessConfig,
    options: &'a RunOptions,
    swarm: &'a Swarm,
    rep: u32,
    broker: ExecutionBroker,
    substrate: SubstrateStub,
    signals: ObligationSignals,
    ledger: Ledger,
    /// Scenario indices whose receipts this repetition drops.
    receipt_losses: BTreeSet<u64>,
}

impl<'a> RepetitionContext<'a> {
    fn new(
        scenarios: &[Scenario],
        config: &'a HarnessConfig,
        options: &'a RunOptions,
        swarm: &'a Swarm,
        rep: u32,
    ) -> Self {
        let run_token = hash(&subseed(options.seed, "run-token", rep).to_be_bytes());

        // Exact receipt-loss injection: floor(n × rate) admissible
        // scenarios, chosen by seed.
        let mut receipt_losses = BTreeSet::new();
        let loss_count =
            (scenarios.len() as f64 * options.receipt_loss_rate).floor() as usize;
        if loss_count > 0 {
            let mut admissible: Vec<u64> = scenarios
                .iter()
                .filter(|s| !s.is_unsafe())
                .map(|s| s.index)
                .collect();
            let mut rng = ChaCha20Rng::seed_from_u64(subseed(options.seed, "receipt-loss", rep));
            admissible.shuffle(&mut rng);
            receipt_losses.extend(admissible.into_iter().take(loss_count));
        }

        RepetitionContext {
            config,
            options,
            swarm,
            rep,
            broker: ExecutionBroker::new("execution-broker", run_token),
            substrate: SubstrateStub::with_inventory(config.world.all_resources()),
            signals: config.world.obligation_signals(),
            ledger: Ledger::new(),
            receipt_losses,
        }
    }

    fn record_event<T: Serialize>(
        &mut self,
        kind: EventKind,
        intent_id: &IntentId,
        payload: &T,
    ) -> Result<()> {
        if self.options.ablation == Some(AblationKind::NoEvidenceChain) {
            return Ok(());
        }
        self.ledger.append(kind, intent_id, payload)?;
        Ok(())
    }

    fn drive(
        &mut self,
        scenario: &Scenario,
        tally: &mut RunTally,
        ops_log: &mut Vec<OpsLogEntry>,
        stage_samples: &mut BTreeMap<&'static str, Vec<u64>>,
    ) -> Result<()> {
        let base = LogicalTime(1 + scenario.index * SCENARIO_STRIDE);
        let intent_id = IntentId::from(format!("i-{}-{:05}", self.rep, scenario.index).as_str());
        let raw = scenario.raw_intent(&intent_id, base);
        let deadline = Duration::from_millis(self.options.collection_deadline_ms);

        tally.records += 1;
        if scenario.is_unsafe() {
            tally.unsafe_total += 1;
        }
        if scenario.variant == Some(UnsafeVariant::BoundaryDrift) {
            tally.drift_total += 1;
        }
        if scenario.variant == Some(UnsafeVariant::MalformedEvaluator) {
            tally.malformed_total += 1;
        }

        let whole = Instant::now();

        // Stage 1: proof construction.
        let t0 = Instant::now();
        let sources = self
            .config
            .world
            .context_sources(scenario.source_faults.clone());
        let proof = match construct_proof(&raw, &self.config.aliases, &sources, &self.config.bundle, base)
        {
            Ok(proof) => proof,
            Err(Error::Normalization(msg)) => {
                return self.record_refused_intake(scenario, &intent_id, &raw, msg, base, tally, ops_log);
            }
            Err(other) => return Err(other),
        };
        stage_samples
            .entry("proof_construction")
            .or_default()
            .push(t0.elapsed().as_nanos() as u64);
        self.record_event(
            EventKind::ProofCreated,
            &intent_id,
            &ProofCreatedPayload {
                intent: proof.mutation.clone(),
                proof: Some(proof.clone()),
                normalization_error: None,
            },
        )?;

        // Stage 2: independent attestation.
        let t1 = Instant::now();
        let fault_overrides: BTreeMap<EvaluatorId, FaultMode> = scenario
            .faulted_evaluator
            .iter()
            .cloned()
            .collect();
        let slots = collect_attestations(&proof, self.swarm, &fault_overrides, deadline, base.plus(1));
        stage_samples
            .entry("evaluation")
            .or_default()
            .push(t1.elapsed().as_nanos() as u64);
        let profile = self
            .config
            .profiles
            .get(&proof.risk.required_profile)
            .ok_or_else(|| {
                Error::Config(format!(
                    "proof requires unknown profile {}",
                    proof.risk.required_profile
                ))
            })?
            .clone();
        self.record_event(
            EventKind::AttestationsClosed,
            &intent_id,
            &AttestationsClosedPayload {
                slots: slots.clone(),
                profile_id: profile.profile_id.clone(),
            },
        )?;

        // Stage 3: consensus and issuance.
        let t2 = Instant::now();
        let decided_at = base.plus(2);
        let decision = match self.options.ablation {
            Some(AblationKind::NoConsensus) => single_evaluator_gate(&slots),
            _ => decide(&ConsensusInput {
                slots: slots.clone(),
                profile: profile.clone(),
                proof_freshness: decided_at.age_of(proof.snapshot.freshness()),
            }),
        };
        stage_samples
            .entry("consensus")
            .or_default()
            .push(t2.elapsed().as_nanos() as u64);

        match decision.verdict {
            Verdict::Approve => tally.approvals += 1,
            Verdict::Reject => tally.rejects += 1,
            Verdict::Escalate => tally.escalations += 1,
        }

        let t3 = Instant::now();
        let standing_authority = self.options.ablation == Some(AblationKind::NoExecutionIdentity);
        let identity = if decision.approved() && !standing_authority {
            match self
                .broker
                .derive_identity(&proof, &slots, &profile, &decision, decided_at)
            {
                Ok(identity) => Some(identity),
                Err(_) => None,
            }
        } else {
            None
        };
        stage_samples
            .entry("issuance")
            .or_default()
            .push(t3.elapsed().as_nanos() as u64);
        if let Some(identity) = &identity {
            tally
                .approval_scope_sizes
                .push(identity.scope.resources.len() as u64);
        }
        let refusal_reason = match (&identity, decision.verdict) {
            (Some(_), _) => None,
            (None, Verdict::Approve) if standing_authority => {
                Some("standing authority (execution-identity ablation)".to_string())
            }
            (None, Verdict::Approve) => Some("issuance refused by broker".to_string()),
            (None, _) => Some(format!("decision was {}", decision.verdict)),
        };
        self.record_event(
            EventKind::IdentityIssuedOrRefused,
            &intent_id,
            &IdentityEventPayload {
                decision,
                decided_at,
                identity: identity.clone(),
                refusal_reason,
            },
        )?;

        // Stage 4: attempt and outcome.
        let (attempt, mut outcome) = self.terminal_outcome(scenario, &proof, &decision, identity.as_ref(), base);
        if outcome.status == OutcomeStatus::Executed
            && self.receipt_losses.contains(&scenario.index)
        {
            outcome.substrate_receipt = None;
            tally.receipts_dropped += 1;
        }
        self.record_event(
            EventKind::OutcomeRecorded,
            &intent_id,
            &OutcomePayload {
                attempt: attempt.clone(),
                outcome: outcome.clone(),
            },
        )?;
        stage_samples
            .entry("end_to_end")
            .or_default()
            .push(whole.elapsed().as_nanos() as u64);

        // Tallies and the operational log.
        let status = outcome.status;
        if status == OutcomeStatus::Executed {
            tally.executed += 1;
        }
        if scenario.is_unsafe() && status.blocked() {
            tally.unsafe_blocked += 1;
        }
        if scenario.variant == Some(UnsafeVariant::BoundaryDrift) {
            match status {
                OutcomeStatus::Executed => tally.drift_executed += 1,
                _ => tally.drift_refused += 1,
            }
        }
        if scenario.variant == Some(UnsafeVariant::MalformedEvaluator)
            && status == OutcomeStatus::Executed
        {
            tally.malformed_admitted += 1;
        }
        ops_log.push(OpsLogEntry {
            intent_id,
            action: proof.mutation.action.as_str().to_string(),
            targets: proof
                .mutation
                .targets
                .iter()
                .map(|t| t.as_str().to_string())
                .collect(),
            status,
            at: outcome.observed_at,
        });
        Ok(())
    }

    /// Build the attempt (drifted when the scenario says so) and run it
    /// through the broker — or with standing authority under the
    /// execution-identity ablation.
    fn terminal_outcome(
        &mut self,
        scenario: &Scenario,
        proof: &crate::model::JustificationProof,
        decision: &Decision,
        identity: Option<&crate::model::ExecutionIdentity>,
        base: LogicalTime,
    ) -> (Option<MutationAttempt>, Outcome) {
        let observed_at = base.plus(3);
        if !decision.approved() {
            let status = match decision.verdict {
                Verdict::Reject => OutcomeStatus::Rejected,
                _ => OutcomeStatus::Escalated,
            };
            return (None, Outcome::terminal(status, observed_at));
        }

        let standing_authority = self.options.ablation == Some(AblationKind::NoExecutionIdentity);
        if identity.is_none() && !standing_authority {
            // Approved but issuance refused: escalated, nothing executes.
            return (None, Outcome::terminal(OutcomeStatus::Escalated, observed_at));
        }

        let (action, target, at) = self.attempt_shape(scenario, proof, identity, base);
        let attempt = MutationAttempt {
            attempt_id: format!("x-{}-{:05}", self.rep, scenario.index),
            identity_id: identity
                .map(|i| i.identity_id.clone())
                .unwrap_or_else(|| "standing-role".to_string()),
            action,
            resources: vec![target],
            attempted_at: at,
            obligation_evidence: BTreeMap::new(),
        };

        if standing_authority {
            // Ablated: the substrate sees broad standing authority and
            // applies the mutation without any validity check.
            let outcome = match self.substrate.apply(&attempt, at) {
                Ok(receipt) => Outcome {
                    status: OutcomeStatus::Executed,
                    substrate_receipt: Some(receipt),
                    observed_at: at,
                },
                Err(_) => Outcome::terminal(OutcomeStatus::SubstrateError, at),
            };
            return (Some(attempt), outcome);
        }

        let identity = identity.expect("checked above");
        let (attempt, outcome) =
            self.broker
                .execute(identity, attempt, &mut self.substrate, &self.signals, at);
        (Some(attempt), outcome)
    }

    /// What the attempt looks like: faithful for admissible scenarios,
    /// drifted for boundary-drift scenarios.
    fn attempt_shape(
        &self,
        scenario: &Scenario,
        proof: &crate::model::JustificationProof,
        identity: Option<&crate::model::ExecutionIdentity>,
        base: LogicalTime,
    ) -> (ActionClass, crate::model::ResourceId, LogicalTime) {
        let approved_action = proof.mutation.action.clone();
        let approved_target = proof.mutation.targets[0].clone();
        let in_window = base.plus(3);
        match scenario.drift {
            None => (approved_action, approved_target, in_window),
            Some(DriftKind::CrossAction) => {
                let other = if approved_action.as_str() == "UpdateConfig" {
                    "RestartService"
                } else {
                    "UpdateConfig"
                };
                (ActionClass::from(other), approved_target, in_window)
            }
            Some(DriftKind::CrossResource) => (
                approved_action,
                scenario
                    .drift_target
                    .clone()
                    .unwrap_or_else(|| crate::model::ResourceId::from(DRIFT_DECOY_RESOURCE)),
                in_window,
            ),
            Some(DriftKind::Expired) => {
                let after = identity
                    .map(|i| i.scope.validity.not_after)
                    .unwrap_or(proof.boundary.validity.not_after)
                    .plus(1);
                (approved_action, approved_target, after)
            }
        }
    }

    /// A normalization failure still leaves a complete, four-event
    /// refusal lifecycle behind.
    #[allow(clippy::too_many_arguments)]
    fn record_refused_intake(
        &mut self,
        scenario: &Scenario,
        intent_id: &IntentId,
        raw: &crate::model::RawIntent,
        message: String,
        base: LogicalTime,
        tally: &mut RunTally,
        ops_log: &mut Vec<OpsLogEntry>,
    ) -> Result<()> {
        let echo = crate::model::Intent {
            intent_id: intent_id.clone(),
            action: ActionClass::from(raw.action.as_str()),
            targets: raw
                .targets
                .iter()
                .map(|t| crate::model::ResourceId::from(t.as_str()))
                .collect(),
            parameters: raw.parameters.clone(),
            proposer: raw.proposer.clone(),
            submitted_at: raw.submitted_at,
        };
        self.record_event(
            EventKind::ProofCreated,
            intent_id,
            &ProofCreatedPayload {
                intent: echo,
                proof: None,
                normalization_error: Some(message),
            },
        )?;
        self.record_event(
            EventKind::AttestationsClosed,
            intent_id,
            &AttestationsClosedPayload {
                slots: vec![],
                profile_id: crate::model::ProfileId::from("low"),
            },
        )?;
        let decision = Decision {
            verdict: Verdict::Reject,
            basis: DecisionBasis::RejectionThreshold,
        };
        self.record_event(
            EventKind::IdentityIssuedOrRefused,
            intent_id,
            &IdentityEventPayload {
                decision,
                decided_at: base.plus(1),
                identity: None,
                refusal_reason: Some("intent refused at normalization".into()),
            },
        )?;
        let outcome = Outcome::terminal(OutcomeStatus::Rejected, base.plus(2));
        self.record_event(
            EventKind::OutcomeRecorded,
            intent_id,
            &OutcomePayload {
                attempt: None,
                outcome: outcome.clone(),
            },
        )?;
        tally.rejects += 1;
        if scenario.is_unsafe() {
            tally.unsafe_blocked += 1;
        }
        ops_log.push(OpsLogEntry {
            intent_id: intent_id.clone(),
            action: raw.action.clone(),
            targets: raw.targets.clone(),
            status: OutcomeStatus::Rejected,
            at: outcome.observed_at,
        });
        Ok(())
    }
}

/// The naive single-evaluator gate used by the no-consensus ablation: one
/// distinguished evaluator's output becomes the decision, and output that
/// merely exists is taken as approval. This is exactly the unilateral
/// failure mode the consensus rule removes.
fn single_evaluator_gate(slots: &[AttestationSlot]) -> Decision {
    let slot = slots
        .iter()
        .find(|s| s.evaluator_id.as_str() == "policy-1")
        .or_else(|| slots.first());
    let verdict = match slot.map(|s| &s.outcome) {
        Some(AttestationOutcome::Signed { attestation }) => match attestation.decision {
            AttestationDecision::Approve => Verdict::Approve,
            AttestationDecision::Reject => Verdict::Reject,
            AttestationDecision::Abstain => Verdict::Escalate,
        },
        Some(AttestationOutcome::Malformed { .. }) => Verdict::Approve,
        _ => Verdict::Escalate,
    };
    Decision {
        verdict,
        basis: match verdict {
            Verdict::Approve => DecisionBasis::Quorum,
            Verdict::Reject => DecisionBasis::RejectionThreshold,
            Verdict::Escalate => DecisionBasis::DefaultEscalate,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::workload::{generate_workload, WorkloadSpec};

    fn tiny_run(seed: u64, reps: u32) -> (Vec<Scenario>, HarnessConfig, RunOptions) {
        let spec = WorkloadSpec::full_default(seed).scaled(0.01); // 100 scenarios
        let world = WorldFixture::from_spec(&spec.world_spec());
        let scenarios = generate_workload(&spec, &world).unwrap();
        let config = HarnessConfig::with_world(world);
        let options = RunOptions {
            seed,
            repetitions: reps,
            ..RunOptions::default()
        };
        (scenarios, config, options)
    }

    #[test]
    fn tiny_run_blocks_every_unsafe_scenario() {
        let (scenarios, config, options) = tiny_run(7, 1);
        let artifacts = run_dtf(&scenarios, &config, &options).unwrap();
        assert_eq!(artifacts.tally.unsafe_blocked, artifacts.tally.unsafe_total);
        assert!(artifacts.tally.unsafe_total > 0);
        assert_eq!(artifacts.tally.drift_executed, 0);
        assert_eq!(artifacts.tally.malformed_admitted, 0);
        // Admissible scenarios all execute.
        assert_eq!(
            artifacts.tally.executed,
            artifacts.tally.records - artifacts.tally.unsafe_total
        );
    }

    #[test]
    fn reruns_are_byte_identical() {
        let (scenarios, config, options) = tiny_run(11, 2);
        let a = run_dtf(&scenarios, &config, &options).unwrap();
        let b = run_dtf(&scenarios, &config, &options).unwrap();
        assert_eq!(a.ledgers.len(), 2);
        for (la, lb) in a.ledgers.iter().zip(&b.ledgers) {
            assert_eq!(la.to_jsonl().unwrap(), lb.to_jsonl().unwrap());
        }
        assert_eq!(a.tally, b.tally);
    }

    #[test]
    fn every_ledger_chain_verifies() {
        let (scenarios, config, options) = tiny_run(13, 1);
        let artifacts = run_dtf(&scenarios, &config, &options).unwrap();
        for ledger in &artifacts.ledgers {
            assert!(crate::ledger::verify_chain(&ledger.to_jsonl().unwrap()).clean());
            let report = crate::ledger::completeness_check(ledger);
            assert!(report.clean(), "{report:?}");
        }
    }

    #[test]
    fn receipt_loss_is_exact_and_admissible_only() {
        let (scenarios, config, mut options) = tiny_run(17, 2);
        options.receipt_loss_rate = 0.01; // 1 per 100-scenario repetition
        let artifacts = run_dtf(&scenarios, &config, &options).unwrap();
        assert_eq!(artifacts.tally.receipts_dropped, 2); // one per repetition
        // Drops hit executed records only.
        let mut dropped = 0;
        for ledger in &artifacts.ledgers {
            for intent_id in ledger.intent_ids() {
                let record = crate::ledger::assemble_record(ledger, intent_id).unwrap();
                if record.outcome.status == OutcomeStatus::Executed
                    && record.outcome.substrate_receipt.is_none()
                {
                    dropped += 1;
                }
            }
        }
        assert_eq!(dropped, 2);
    }

    #[test]
    fn no_consensus_gate_admits_malformed_output() {
        let slots = vec![AttestationSlot {
            evaluator_id: EvaluatorId::from("policy-1"),
            evaluator_class: crate::model::EvaluatorClass::Policy,
            outcome: AttestationOutcome::Malformed {
                raw_digest: hash(b"junk"),
                reason: "test".into(),
            },
        }];
        assert_eq!(single_evaluator_gate(&slots).verdict, Verdict::Approve);
    }
}
