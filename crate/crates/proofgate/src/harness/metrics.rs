//! Metric computation and reporting.
//!
//! Every rate here is computed from assembled evidence records, never
//! from in-memory pipeline state, so the numbers are auditable from the
//! ledger files alone. Latency is the one exception: it is observed at
//! run time, reported for orientation, and never asserted — it depends
//! on hardware, not on the authorization semantics.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::pipeline::{OpsLogEntry, RunTally};
use crate::error::Result;
use crate::ledger::{assemble_record, completeness_check, replay, ArtifactStores, Ledger};
use crate::model::OutcomeStatus;

/// Fraction of the five audit questions a bare execution log answers
/// (what mutation, what outcome).
pub fn ops_log_replay_score() -> f64 {
    2.0 / 5.0
}

/// Fraction answered by a policy-precheck log that also captures the
/// policy basis and its cached context.
pub fn precheck_log_replay_score() -> f64 {
    3.0 / 5.0
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Latency summary for one pipeline stage, in microseconds. Report-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLatency {
    pub stage: String,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
}

/// A record that failed full replay, with the reasons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFailure {
    pub record_id: String,
    pub notes: Vec<String>,
}

/// The aggregate metrics for one run (or baseline, or ablation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Lifecycle records observed (scenarios × repetitions).
    pub records: u64,
    pub executed: u64,
    pub approvals: u64,
    pub unsafe_total: u64,
    pub unsafe_blocked: u64,
    pub drift_attempts: u64,
    pub drift_refused: u64,
    pub malformed_cases_total: u64,
    pub malformed_cases_admitted: u64,

    /// Records whose proof has all five fields populated and a hash that
    /// recomputes.
    pub complete_proof_rate: f64,
    /// Records where every required evaluator class produced a
    /// well-formed, signature-verified attestation over the proof hash.
    /// Absent for systems that collect no attestations.
    pub attestation_coverage: Option<f64>,
    pub unsafe_block_rate: f64,
    pub drift_refusal_rate: f64,
    pub mean_resources_per_approval: f64,
    pub p95_resources_per_approval: f64,
    pub evidence_completeness: f64,
    /// Mean fraction of the five audit questions answered consistently
    /// per record; 1.0 means every record replays in full.
    pub replay_success: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replay_failures: Vec<ReplayFailure>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<Vec<StageLatency>>,
}

impl MetricsReport {
    /// The enforcement-invariant metrics that must be exactly 100%.
    pub fn invariants_exact(&self) -> bool {
        self.complete_proof_rate == 1.0
            && self.attestation_coverage == Some(1.0)
            && self.unsafe_block_rate == 1.0
            && self.drift_refusal_rate == 1.0
            && self.evidence_completeness == 1.0
    }

    /// Plain-text aggregate table.
    pub fn text_table(&self) -> String {
        let pct = |v: f64| format!("{:.1}%", v * 100.0);
        let mut out = String::new();
        out.push_str(&format!("{:<44} {:>10}\n", "metric", "value"));
        out.push_str(&format!("{:-<55}\n", ""));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "complete proof records",
            pct(self.complete_proof_rate)
        ));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "required attestation coverage",
            self.attestation_coverage
                .map(pct)
                .unwrap_or_else(|| "--".into())
        ));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "unsafe block or escalation",
            pct(self.unsafe_block_rate)
        ));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "boundary-drift refusal",
            pct(self.drift_refusal_rate)
        ));
        out.push_str(&format!(
            "{:<44} {:>10.1}\n",
            "mean mutable resources per approval", self.mean_resources_per_approval
        ));
        out.push_str(&format!(
            "{:<44} {:>10.1}\n",
            "p95 mutable resources per approval", self.p95_resources_per_approval
        ));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "evidence completeness",
            pct(self.evidence_completeness)
        ));
        out.push_str(&format!(
            "{:<44} {:>10}\n",
            "replay success",
            pct(self.replay_success)
        ));
        if let Some(stages) = &self.latency {
            out.push('\n');
            out.push_str(&format!(
                "{:<24} {:>9} {:>9} {:>9} {:>9}   (reported, not asserted)\n",
                "stage latency (us)", "mean", "p50", "p95", "p99"
            ));
            out.push_str(&format!("{:-<75}\n", ""));
            for s in stages {
                out.push_str(&format!(
                    "{:<24} {:>9.1} {:>9.1} {:>9.1} {:>9.1}\n",
                    s.stage, s.mean_us, s.p50_us, s.p95_us, s.p99_us
                ));
            }
        }
        out
    }

    /// Report for a run that kept no evidence chain: runtime tallies plus
    /// log-only replay.
    pub fn from_tally_and_logs(tally: &RunTally, _logs: &[OpsLogEntry]) -> MetricsReport {
        MetricsReport {
            records: tally.records,
            executed: tally.executed,
            approvals: tally.approvals,
            unsafe_total: tally.unsafe_total,
            unsafe_blocked: tally.unsafe_blocked,
            drift_attempts: tally.drift_total,
            drift_refused: tally.drift_refused,
            malformed_cases_total: tally.malformed_total,
            malformed_cases_admitted: tally.malformed_admitted,
            complete_proof_rate: 0.0,
            attestation_coverage: None,
            unsafe_block_rate: rate(tally.unsafe_blocked, tally.unsafe_total),
            drift_refusal_rate: rate(tally.drift_refused, tally.drift_total),
            mean_resources_per_approval: mean(&tally.approval_scope_sizes),
            p95_resources_per_approval: p95(&tally.approval_scope_sizes),
            evidence_completeness: 0.0,
            replay_success: ops_log_replay_score(),
            replay_failures: Vec::new(),
            latency: None,
        }
    }
}

pub(crate) fn rate(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        1.0 // vacuously satisfied
    } else {
        numerator as f64 / denominator as f64
    }
}

fn mean(values: &[u64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<u64>() as f64 / values.len() as f64
    }
}

fn p95(values: &[u64]) -> f64 {
    percentile(values, 0.95)
}

fn percentile(values: &[u64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let idx = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx] as f64
}

/// Summarize one stage's nanosecond samples into microseconds.
pub fn summarize_stage(stage: &str, samples_ns: &[u64]) -> StageLatency {
    let to_us = 1_000.0;
    StageLatency {
        stage: stage.to_string(),
        mean_us: mean(samples_ns) / to_us,
        p50_us: percentile(samples_ns, 0.50) / to_us,
        p95_us: percentile(samples_ns, 0.95) / to_us,
        p99_us: percentile(samples_ns, 0.99) / to_us,
    }
}

// ---------------------------------------------------------------------------
// Ledger-derived metrics
// ---------------------------------------------------------------------------

fn workload_variant(record: &crate::model::EvidenceRecord) -> Option<&str> {
    record
        .intent
        .parameters
        .get("workload_variant")
        .map(|s| s.as_str())
        .filter(|s| *s != "admissible")
}

/// Compute the full report from sealed ledgers and pinned stores. Pure
/// aggregation over assembled records; nothing comes from pipeline state.
pub fn compute_metrics(ledgers: &[Ledger], stores: &ArtifactStores) -> Result<MetricsReport> {
    let mut records = 0u64;
    let mut executed = 0u64;
    let mut approvals = 0u64;
    let mut unsafe_total = 0u64;
    let mut unsafe_blocked = 0u64;
    let mut drift_attempts = 0u64;
    let mut drift_refused = 0u64;
    let mut malformed_total = 0u64;
    let mut malformed_admitted = 0u64;
    let mut proofs_complete = 0u64;
    let mut coverage_ok = 0u64;
    let mut scope_sizes: Vec<u64> = Vec::new();
    let mut replay_scores = 0.0f64;
    let mut replay_failures = Vec::new();
    let mut completeness_total = 0usize;
    let mut completeness_complete = 0usize;

    for ledger in ledgers {
        let completeness = completeness_check(ledger);
        completeness_total += completeness.total_intents;
        completeness_complete += completeness.complete;

        for intent_id in ledger.intent_ids() {
            let record = assemble_record(ledger, intent_id)?;
            records += 1;

            if record.proof.fields_complete() && record.proof.hash_verifies() {
                proofs_complete += 1;
            }

            if let Some(profile) = stores.profiles.get(&record.profile_id) {
                let covered_classes: BTreeSet<_> = record
                    .attestations
                    .iter()
                    .filter(|slot| {
                        slot.signed().is_some_and(|att| {
                            att.proof_hash == record.proof.proof_hash
                                && att.signature_verifies(&stores.keys)
                        })
                    })
                    .map(|slot| slot.evaluator_class)
                    .collect();
                if profile
                    .required_classes
                    .iter()
                    .all(|c| covered_classes.contains(c))
                {
                    coverage_ok += 1;
                }
            }

            let status = record.outcome.status;
            if status == OutcomeStatus::Executed {
                executed += 1;
            }
            if record.decision.approved() {
                approvals += 1;
            }
            if let Some(identity) = &record.identity {
                scope_sizes.push(identity.scope.resources.len() as u64);
            }

            match workload_variant(&record) {
                Some(variant) => {
                    unsafe_total += 1;
                    if status.blocked() {
                        unsafe_blocked += 1;
                    }
                    if variant == "boundary_drift" {
                        drift_attempts += 1;
                        if status.blocked() {
                            drift_refused += 1;
                        }
                    }
                    if variant == "malformed_evaluator" {
                        malformed_total += 1;
                        if status == OutcomeStatus::Executed {
                            malformed_admitted += 1;
                        }
                    }
                }
                None => {}
            }

            let verdict = replay(&record, stores);
            replay_scores += verdict.score();
            if !verdict.fully_replayable() {
                replay_failures.push(ReplayFailure {
                    record_id: verdict.record_id.clone(),
                    notes: verdict.failing_notes(),
                });
            }
        }
    }

    Ok(MetricsReport {
        records,
        executed,
        approvals,
        unsafe_total,
        unsafe_blocked,
        drift_attempts,
        drift_refused,
        malformed_cases_total: malformed_total,
        malformed_cases_admitted: malformed_admitted,
        complete_proof_rate: rate(proofs_complete, records),
        attestation_coverage: Some(rate(coverage_ok, records)),
        unsafe_block_rate: rate(unsafe_blocked, unsafe_total),
        drift_refusal_rate: rate(drift_refused, drift_attempts),
        mean_resources_per_approval: mean(&scope_sizes),
        p95_resources_per_approval: p95(&scope_sizes),
        evidence_completeness: rate(completeness_complete as u64, completeness_total as u64),
        replay_success: if records == 0 {
            1.0
        } else {
            replay_scores / records as f64
        },
        replay_failures,
        latency: None,
    })
}
