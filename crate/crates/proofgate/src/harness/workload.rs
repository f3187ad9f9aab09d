//! Deterministic synthetic workload generation.
//!
//! Three scenario families — destructive termination, configuration
//! mutation during partial degradation, and emergency break-glass — with
//! five unsafe variant classes layered on top. Each unsafe variant
//! manipulates exactly one safety lever: a missing dependency source, a
//! stale world, a protected target, a post-approval drift attempt, or a
//! malformed evaluator. Generation is seeded and reproducible: the same
//! spec and seed always yield the identical scenario list.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use super::fixtures::{WorldFixture, WorldSpec};
use crate::engine::SourceFault;
use crate::error::{Error, Result};
use crate::model::{EvaluatorId, FactDomain, IntentId, RawIntent, ResourceId};
use crate::swarm::FaultMode;
use crate::time::LogicalTime;

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCounts {
    pub termination: u64,
    pub config_mutation: u64,
    pub break_glass: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsafeCounts {
    pub missing_dependency_context: u64,
    pub stale_state: u64,
    pub protected_resource: u64,
    pub boundary_drift: u64,
    pub malformed_evaluator: u64,
}

impl UnsafeCounts {
    pub fn total(&self) -> u64 {
        self.missing_dependency_context
            + self.stale_state
            + self.protected_resource
            + self.boundary_drift
            + self.malformed_evaluator
    }
}

/// Workload shape: scenario counts, unsafe variant counts, seed, scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub scenarios: ScenarioCounts,
    pub unsafe_variants: UnsafeCounts,
    pub seed: u64,
    pub scale: f64,
}

impl WorkloadSpec {
    /// Full-scale default: 10,000 scenarios (3,500 / 4,500 / 2,000) with
    /// 2,400 unsafe variants (900 / 650 / 350 / 300 / 200).
    pub fn full_default(seed: u64) -> Self {
        WorkloadSpec {
            scenarios: ScenarioCounts {
                termination: 3_500,
                config_mutation: 4_500,
                break_glass: 2_000,
            },
            unsafe_variants: UnsafeCounts {
                missing_dependency_context: 900,
                stale_state: 650,
                protected_resource: 350,
                boundary_drift: 300,
                malformed_evaluator: 200,
            },
            seed,
            scale: 1.0,
        }
    }

    /// Desk-scale default: the full workload at scale 0.1, i.e. 1,000
    /// scenarios with 90 / 65 / 35 / 30 / 20 unsafe variants.
    pub fn desk_default(seed: u64) -> Self {
        Self::full_default(seed).scaled(0.1)
    }

    /// Scale every count, rounding to nearest.
    pub fn scaled(mut self, factor: f64) -> Self {
        let scale = |n: u64| ((n as f64) * factor).round() as u64;
        self.scenarios = ScenarioCounts {
            termination: scale(self.scenarios.termination),
            config_mutation: scale(self.scenarios.config_mutation),
            break_glass: scale(self.scenarios.break_glass),
        };
        self.unsafe_variants = UnsafeCounts {
            missing_dependency_context: scale(self.unsafe_variants.missing_dependency_context),
            stale_state: scale(self.unsafe_variants.stale_state),
            protected_resource: scale(self.unsafe_variants.protected_resource),
            boundary_drift: scale(self.unsafe_variants.boundary_drift),
            malformed_evaluator: scale(self.unsafe_variants.malformed_evaluator),
        };
        self.scale *= factor;
        self
    }

    pub fn total(&self) -> u64 {
        self.scenarios.termination + self.scenarios.config_mutation + self.scenarios.break_glass
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::Config("workload has zero scenarios".into()));
        }
        if self.unsafe_variants.total() > self.total() {
            return Err(Error::Config(format!(
                "unsafe variant counts ({}) exceed total scenarios ({})",
                self.unsafe_variants.total(),
                self.total()
            )));
        }
        Ok(())
    }

    /// A world large enough for this workload: unique termination targets,
    /// one service per config mutation, protected and router pools.
    pub fn world_spec(&self) -> WorldSpec {
        WorldSpec {
            // Termination and break-glass targets are consumed uniquely;
            // cross-resource drift attempts each consume one more.
            safe_instances: (self.scenarios.termination
                + self.scenarios.break_glass
                + self.unsafe_variants.boundary_drift) as usize,
            services: (self.scenarios.config_mutation as usize).max(1),
            protected_instances: (self.unsafe_variants.protected_resource as usize).max(4),
            traffic_routers: 4,
        }
    }
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Termination,
    ConfigMutation,
    BreakGlass,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Termination => "termination",
            ScenarioKind::ConfigMutation => "config_mutation",
            ScenarioKind::BreakGlass => "break_glass",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnsafeVariant {
    MissingDependencyContext,
    StaleState,
    ProtectedResource,
    BoundaryDrift,
    MalformedEvaluator,
}

impl UnsafeVariant {
    pub const ALL: [UnsafeVariant; 5] = [
        UnsafeVariant::MissingDependencyContext,
        UnsafeVariant::StaleState,
        UnsafeVariant::ProtectedResource,
        UnsafeVariant::BoundaryDrift,
        UnsafeVariant::MalformedEvaluator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UnsafeVariant::MissingDependencyContext => "missing_dependency_context",
            UnsafeVariant::StaleState => "stale_state",
            UnsafeVariant::ProtectedResource => "protected_resource",
            UnsafeVariant::BoundaryDrift => "boundary_drift",
            UnsafeVariant::MalformedEvaluator => "malformed_evaluator",
        }
    }
}

impl fmt::Display for UnsafeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a drift scenario's post-approval attempt escapes the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    /// A different action under the same identity.
    CrossAction,
    /// A different resource under the same identity.
    CrossResource,
    /// The approved attempt, after the window closed.
    Expired,
}

/// One generated scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub index: u64,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<UnsafeVariant>,
    pub target: ResourceId,
    /// Raw action text as the agent would submit it (alias or canonical).
    pub raw_action: String,
    pub parameters: BTreeMap<String, String>,
    pub proposer: String,
    /// Per-domain source faults this scenario applies during binding.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub source_faults: BTreeMap<FactDomain, SourceFault>,
    /// Evaluator fault this scenario applies during collection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faulted_evaluator: Option<(EvaluatorId, FaultMode)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftKind>,
    /// Off-scope resource a cross-resource drift attempt targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_target: Option<ResourceId>,
}

impl Scenario {
    /// The raw intent this scenario submits.
    pub fn raw_intent(&self, intent_id: &IntentId, at: LogicalTime) -> RawIntent {
        RawIntent {
            intent_id: intent_id.as_str().to_string(),
            action: self.raw_action.clone(),
            targets: vec![self.target.as_str().to_string()],
            parameters: self.parameters.clone(),
            proposer: self.proposer.clone(),
            submitted_at: at,
        }
    }

    pub fn is_unsafe(&self) -> bool {
        self.variant.is_some()
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Evaluators eligible for the malformed-output fault: only classes with
/// redundant membership, so every class still produces one well-formed
/// attestation and required-class coverage stays checkable. Assignment
/// cycles deterministically.
const MALFORMED_FAULT_CANDIDATES: [&str; 4] = ["policy-1", "policy-2", "state-1", "state-2"];

/// Generate the seeded scenario list for a spec against a world.
pub fn generate_workload(spec: &WorkloadSpec, world: &WorldFixture) -> Result<Vec<Scenario>> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    // Kind sequence, shuffled once.
    let mut kinds = Vec::with_capacity(spec.total() as usize);
    kinds.extend(std::iter::repeat_n(
        ScenarioKind::Termination,
        spec.scenarios.termination as usize,
    ));
    kinds.extend(std::iter::repeat_n(
        ScenarioKind::ConfigMutation,
        spec.scenarios.config_mutation as usize,
    ));
    kinds.extend(std::iter::repeat_n(
        ScenarioKind::BreakGlass,
        spec.scenarios.break_glass as usize,
    ));
    kinds.shuffle(&mut rng);

    // Variant assignment: shuffle indices, slice per variant.
    let mut indices: Vec<usize> = (0..kinds.len()).collect();
    indices.shuffle(&mut rng);
    let mut variants: Vec<Option<UnsafeVariant>> = vec![None; kinds.len()];
    let mut cursor = 0usize;
    for variant in UnsafeVariant::ALL {
        let count = match variant {
            UnsafeVariant::MissingDependencyContext => {
                spec.unsafe_variants.missing_dependency_context
            }
            UnsafeVariant::StaleState => spec.unsafe_variants.stale_state,
            UnsafeVariant::ProtectedResource => spec.unsafe_variants.protected_resource,
            UnsafeVariant::BoundaryDrift => spec.unsafe_variants.boundary_drift,
            UnsafeVariant::MalformedEvaluator => spec.unsafe_variants.malformed_evaluator,
        } as usize;
        for &idx in indices[cursor..cursor + count].iter() {
            variants[idx] = Some(variant);
        }
        cursor += count;
    }

    // Target pools.
    let safe_pool = world.safe_instances();
    let service_pool = world.services();
    let protected_pool = world.protected_resources();
    if service_pool.is_empty() || protected_pool.is_empty() {
        return Err(Error::Config(
            "world fixture lacks service or protected resource pools".into(),
        ));
    }
    let needed_safe = kinds
        .iter()
        .zip(&variants)
        .filter(|(k, v)| {
            !matches!(k, ScenarioKind::ConfigMutation)
                && **v != Some(UnsafeVariant::ProtectedResource)
        })
        .count()
        + spec.unsafe_variants.boundary_drift as usize;
    if safe_pool.len() < needed_safe {
        return Err(Error::Config(format!(
            "world fixture has {} safe instances but the workload needs {needed_safe}",
            safe_pool.len()
        )));
    }

    let mut safe_cursor = 0usize;
    let mut scenarios = Vec::with_capacity(kinds.len());
    let mut drift_cycle = [DriftKind::CrossAction, DriftKind::CrossResource, DriftKind::Expired]
        .iter()
        .cycle();
    let mut malformed_cycle = MALFORMED_FAULT_CANDIDATES.iter().cycle();
    let mut protected_cursor = 0usize;
    let mut service_cursor = 0usize;

    for (idx, (kind, variant)) in kinds.iter().zip(&variants).enumerate() {
        let variant = *variant;

        // Target: protected variants target tagged resources; config
        // mutations target services; everything else consumes a unique
        // safe instance so admissible terminations always apply cleanly.
        let target = if variant == Some(UnsafeVariant::ProtectedResource) {
            let t = protected_pool[protected_cursor % protected_pool.len()].clone();
            protected_cursor += 1;
            t
        } else if *kind == ScenarioKind::ConfigMutation {
            let t = service_pool[service_cursor % service_pool.len()].clone();
            service_cursor += 1;
            t
        } else {
            let t = safe_pool[safe_cursor].clone();
            safe_cursor += 1;
            t
        };

        // Raw action alternates alias and canonical spellings so the
        // normalizer earns its keep on real traffic.
        let raw_action = match kind {
            ScenarioKind::Termination | ScenarioKind::BreakGlass => {
                if idx % 2 == 0 {
                    "terminate-instance"
                } else {
                    "TerminateInstance"
                }
            }
            ScenarioKind::ConfigMutation => {
                if idx % 2 == 0 {
                    "update-config"
                } else {
                    "UpdateConfig"
                }
            }
        };

        let mut parameters = BTreeMap::new();
        parameters.insert("workload_kind".to_string(), kind.as_str().to_string());
        parameters.insert(
            "workload_variant".to_string(),
            variant.map(|v| v.as_str()).unwrap_or("admissible").to_string(),
        );
        if *kind == ScenarioKind::BreakGlass {
            parameters.insert("break_glass".to_string(), "true".to_string());
        }

        let mut source_faults = BTreeMap::new();
        let mut faulted_evaluator = None;
        let mut drift = None;
        let mut drift_target = None;
        match variant {
            Some(UnsafeVariant::MissingDependencyContext) => {
                source_faults.insert(FactDomain::Dependencies, SourceFault::Missing);
            }
            Some(UnsafeVariant::StaleState) => {
                for domain in FactDomain::ALL {
                    source_faults.insert(domain, SourceFault::Stale);
                }
            }
            Some(UnsafeVariant::BoundaryDrift) => {
                let kind = *drift_cycle.next().expect("cycle is infinite");
                drift = Some(kind);
                if kind == DriftKind::CrossResource {
                    // Each cross-resource drift gets its own off-scope
                    // target so drifted attempts stay independent.
                    drift_target = Some(safe_pool[safe_cursor].clone());
                    safe_cursor += 1;
                }
            }
            Some(UnsafeVariant::MalformedEvaluator) => {
                faulted_evaluator = Some((
                    EvaluatorId::from(*malformed_cycle.next().expect("cycle is infinite")),
                    FaultMode::MalformedOutput,
                ));
            }
            Some(UnsafeVariant::ProtectedResource) | None => {}
        }

        scenarios.push(Scenario {
            index: idx as u64,
            kind: *kind,
            variant,
            target,
            raw_action: raw_action.to_string(),
            parameters,
            proposer: format!("agent-{:02}", idx % 20),
            source_faults,
            faulted_evaluator,
            drift,
            drift_target,
        });
    }

    Ok(scenarios)
}
