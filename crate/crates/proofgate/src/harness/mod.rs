//! Deterministic workload harness, baselines, ablations, and metrics.

pub mod ablation;
pub mod baseline;
pub mod fixtures;
pub mod metrics;
pub mod pipeline;
pub mod workload;

pub use ablation::{run_ablation, AblationReport};
pub use baseline::{run_baseline_b1, run_baseline_b2, BaselineConfig};
pub use fixtures::{WorldFixture, WorldSpec};
pub use metrics::{compute_metrics, MetricsReport, StageLatency};
pub use pipeline::{
    run_dtf, AblationKind, HarnessConfig, OpsLogEntry, RunArtifacts, RunOptions, RunTally,
};
pub use workload::{
    generate_workload, DriftKind, Scenario, ScenarioCounts, ScenarioKind, UnsafeCounts,
    UnsafeVariant, WorkloadSpec,
};
