//! Component ablations.
//!
//! Each ablation removes exactly one mechanism and reruns the workload:
//! `no_consensus` routes approval through a single evaluator,
//! `no_execution_identity` executes approved intents with standing
//! authority, and `no_evidence_chain` disables the ledger. The
//! comparison report shows what each mechanism was carrying.

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::pipeline::{run_dtf, AblationKind, HarnessConfig, RunOptions};
use super::workload::Scenario;
use crate::error::Result;

/// One ablated run's report plus the headline deltas against full DTF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub kind: AblationKind,
    pub metrics: MetricsReport,
    /// Malformed-evaluator cases that executed under the ablation.
    pub malformed_cases_admitted: u64,
    /// Boundary-drift attempts that executed under the ablation.
    pub drift_attempts_executed: u64,
    pub drift_attempts_total: u64,
    /// Replay success drop versus the full pipeline, in points of 1.0.
    pub replay_drop_vs_full: f64,
}

/// Run one ablation over the scenario list and compare against a full
/// run under the same seed and repetitions.
pub fn run_ablation(
    kind: AblationKind,
    scenarios: &[Scenario],
    config: &HarnessConfig,
    options: &RunOptions,
) -> Result<AblationReport> {
    let full = run_dtf(scenarios, config, options)?;
    let ablated = run_dtf(
        scenarios,
        config,
        &RunOptions {
            ablation: Some(kind),
            ..*options
        },
    )?;

    Ok(AblationReport {
        kind,
        malformed_cases_admitted: ablated.tally.malformed_admitted,
        drift_attempts_executed: ablated.tally.drift_executed,
        drift_attempts_total: ablated.tally.drift_total,
        replay_drop_vs_full: full.report.replay_success - ablated.report.replay_success,
        metrics: ablated.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures::WorldFixture;
    use crate::harness::workload::{generate_workload, WorkloadSpec};

    fn small_inputs() -> (Vec<Scenario>, HarnessConfig, RunOptions) {
        let spec = WorkloadSpec::full_default(21).scaled(0.02); // 200 scenarios
        let world = WorldFixture::from_spec(&spec.world_spec());
        let scenarios = generate_workload(&spec, &world).unwrap();
        let config = HarnessConfig::with_world(world);
        let options = RunOptions {
            seed: 21,
            repetitions: 1,
            ..RunOptions::default()
        };
        (scenarios, config, options)
    }

    #[test]
    fn no_consensus_admits_some_malformed_cases() {
        let (scenarios, config, options) = small_inputs();
        let report =
            run_ablation(AblationKind::NoConsensus, &scenarios, &config, &options).unwrap();
        assert!(
            report.malformed_cases_admitted > 0,
            "single-evaluator approval must reintroduce unilateral failure"
        );
    }

    #[test]
    fn no_execution_identity_makes_all_drift_executable() {
        let (scenarios, config, options) = small_inputs();
        let report = run_ablation(
            AblationKind::NoExecutionIdentity,
            &scenarios,
            &config,
            &options,
        )
        .unwrap();
        assert!(report.drift_attempts_total > 0);
        assert_eq!(report.drift_attempts_executed, report.drift_attempts_total);
    }

    #[test]
    fn no_evidence_chain_collapses_replay() {
        let (scenarios, config, options) = small_inputs();
        let report = run_ablation(
            AblationKind::NoEvidenceChain,
            &scenarios,
            &config,
            &options,
        )
        .unwrap();
        assert!(
            report.replay_drop_vs_full >= 0.40,
            "drop was {}",
            report.replay_drop_vs_full
        );
        // Gating stays intact without the ledger; only auditability falls.
        assert_eq!(report.metrics.unsafe_block_rate, 1.0);
    }
}
