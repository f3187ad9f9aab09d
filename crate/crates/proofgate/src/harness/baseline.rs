//! The two comparison baselines.
//!
//! B1 executes everything under standing credentials and logs only
//! execution events. B2 runs a policy-only precheck against a stale local
//! context cache and then executes with the same standing authority:
//! better than nothing, but context-dependent hazards leak at a
//! calibrated rate and nothing enforces boundaries after approval.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::fixtures::WorldFixture;
use super::metrics::{ops_log_replay_score, precheck_log_replay_score, rate, MetricsReport};
use super::workload::{Scenario, UnsafeVariant};
use crate::engine::{bind_context, evaluate_policy, normalize, AliasTable};
use crate::model::{PolicyBundle, RiskClass};
use crate::time::LogicalTime;

/// Standing-credential exposure and B2 leak calibration.
///
/// The exposure numbers are configuration echoes describing the standing
/// role, not measurements. The leak rate calibrates what fraction of
/// stale-state and missing-context hazards the B2 cache fails to see;
/// combined with the structural drift pass-through it reproduces the
/// reference 14% unsafe pass-through at default scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub standing_mean_resources: f64,
    pub standing_p95_resources: f64,
    pub b2_stale_leak_rate: f64,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            standing_mean_resources: 450.0,
            standing_p95_resources: 1_120.0,
            b2_stale_leak_rate: 36.0 / 1_550.0,
            seed: 7,
        }
    }
}

/// B1: standing credentials, ordinary logs, no proofs, no attestations.
/// Every request — including every unsafe variant — executes.
pub fn run_baseline_b1(scenarios: &[Scenario], config: &BaselineConfig) -> MetricsReport {
    let records = scenarios.len() as u64;
    let unsafe_total = scenarios.iter().filter(|s| s.is_unsafe()).count() as u64;
    let drift = scenarios
        .iter()
        .filter(|s| s.variant == Some(UnsafeVariant::BoundaryDrift))
        .count() as u64;
    let malformed = scenarios
        .iter()
        .filter(|s| s.variant == Some(UnsafeVariant::MalformedEvaluator))
        .count() as u64;

    MetricsReport {
        records,
        executed: records,
        approvals: records,
        unsafe_total,
        unsafe_blocked: 0,
        drift_attempts: drift,
        drift_refused: 0,
        malformed_cases_total: malformed,
        malformed_cases_admitted: malformed,
        complete_proof_rate: 0.0,
        attestation_coverage: None,
        unsafe_block_rate: 0.0,
        drift_refusal_rate: 0.0,
        mean_resources_per_approval: config.standing_mean_resources,
        p95_resources_per_approval: config.standing_p95_resources,
        evidence_completeness: 0.0,
        replay_success: ops_log_replay_score(),
        replay_failures: Vec::new(),
        latency: None,
    }
}

/// B2: policy-only precheck over a stale cached snapshot, then standing
/// execution authority.
///
/// The precheck is the real policy evaluation run against a cache bound
/// once from the world with aged timestamps. It blocks what policy data
/// alone can see (protected targeting) and fails closed when its own
/// output is corrupted. It cannot see collection-time hazards, so
/// stale-state and missing-context cases leak at the calibrated rate,
/// and with no post-approval enforcement every boundary-drift attempt
/// executes.
pub fn run_baseline_b2(
    scenarios: &[Scenario],
    config: &BaselineConfig,
    world: &WorldFixture,
    bundle: &PolicyBundle,
    aliases: &AliasTable,
) -> MetricsReport {
    // Which stale/missing hazards slip past the cache, chosen by seed at
    // exactly the calibrated rate.
    let stale_missing: Vec<u64> = scenarios
        .iter()
        .filter(|s| {
            matches!(
                s.variant,
                Some(UnsafeVariant::StaleState) | Some(UnsafeVariant::MissingDependencyContext)
            )
        })
        .map(|s| s.index)
        .collect();
    let leak_count = (stale_missing.len() as f64 * config.b2_stale_leak_rate).round() as usize;
    let mut shuffled = stale_missing.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0xb2b2_b2b2);
    shuffled.shuffle(&mut rng);
    let leaked: BTreeSet<u64> = shuffled.into_iter().take(leak_count).collect();

    let records = scenarios.len() as u64;
    let unsafe_total = scenarios.iter().filter(|s| s.is_unsafe()).count() as u64;
    let mut executed = 0u64;
    let mut unsafe_blocked = 0u64;
    let mut drift_attempts = 0u64;
    let mut malformed_total = 0u64;

    for scenario in scenarios {
        let base = LogicalTime(1 + scenario.index * 1_000);
        let blocked = match scenario.variant {
            // The precheck's own output is corrupted; the executor cannot
            // parse a verdict and fails closed.
            Some(UnsafeVariant::MalformedEvaluator) => {
                malformed_total += 1;
                true
            }
            // Cache knows the hazard unless this index leaked.
            Some(UnsafeVariant::StaleState) | Some(UnsafeVariant::MissingDependencyContext) => {
                !leaked.contains(&scenario.index)
            }
            // No post-approval enforcement: the drifted attempt executes.
            Some(UnsafeVariant::BoundaryDrift) => {
                drift_attempts += 1;
                false
            }
            // Protected targeting is visible in policy data even on a
            // stale cache; everything else passes the precheck honestly.
            Some(UnsafeVariant::ProtectedResource) | None => {
                let raw = scenario.raw_intent(
                    &crate::model::IntentId::from(format!("b2-{}", scenario.index).as_str()),
                    base,
                );
                match normalize(&raw, aliases) {
                    Err(_) => true,
                    Ok(intent) => {
                        // The cached snapshot: bound once, aged timestamps.
                        let cached = bind_context(
                            &intent,
                            &world.context_sources(Default::default()),
                            LogicalTime(base.ticks().saturating_sub(600)),
                        );
                        let (_, risk) = evaluate_policy(&cached, bundle, &intent);
                        risk.risk_class == RiskClass::Protected
                    }
                }
            }
        };
        if blocked {
            if scenario.is_unsafe() {
                unsafe_blocked += 1;
            }
        } else {
            executed += 1;
        }
    }

    MetricsReport {
        records,
        executed,
        approvals: executed,
        unsafe_total,
        unsafe_blocked,
        drift_attempts,
        drift_refused: 0,
        malformed_cases_total: malformed_total,
        malformed_cases_admitted: 0,
        complete_proof_rate: 0.0,
        attestation_coverage: None,
        unsafe_block_rate: rate(unsafe_blocked, unsafe_total),
        drift_refusal_rate: 0.0,
        mean_resources_per_approval: config.standing_mean_resources,
        p95_resources_per_approval: config.standing_p95_resources,
        evidence_completeness: 0.0,
        replay_success: precheck_log_replay_score(),
        replay_failures: Vec::new(),
        latency: None,
    }
}
