//! Default fixtures: the synthetic world, context sources, policy bundle,
//! governance profiles, evaluator registry, and alias table.
//!
//! Everything here is deterministic and file-loadable; the defaults are
//! what ship in the repository's `fixtures/` directory.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use crate::crypto::EvaluatorKey;
use crate::engine::{AliasTable, ContextSource, SourceFault};
use crate::error::{Error, Result};
use crate::model::{
    ActionClass, AttestationDecision, BoundaryTemplate, ContextBinding, ContextValue,
    EvaluatorClass, EvaluatorId, FactDomain, GovernanceMetadata, GovernanceProfiles, PolicyBundle,
    PolicyRule, ProfileId, ResourceId, RiskClass, RuleMatch,
};
use crate::swarm::{
    EvaluatorBehavior, EvaluatorRegistration, FaultMode, HumanEscalationAdapter, PolicyEvaluator,
    RiskEvaluator, RiskEvaluatorConfig, SimulationEvaluator, StateEvaluator, Swarm, SwarmMember,
    WorldModel,
};
use crate::time::LogicalTime;

/// Tag that marks a resource as protected.
pub const PROTECTED_TAG: &str = "protected";

/// Intent parameter that authorizes mutations on protected resources.
pub const PROTECTED_AUTHORIZATION_PARAMETER: &str = "change_ticket";

/// How far into the past a stale source's capture timestamps lie.
pub const STALE_OFFSET_TICKS: u64 = 300;

/// Snapshot freshness window shared by profiles and state evaluators.
pub const FRESHNESS_WINDOW_TICKS: u64 = 60;

/// Decoy resource used as the off-scope target in drift scenarios.
pub const DRIFT_DECOY_RESOURCE: &str = "decoy-0000";

// ---------------------------------------------------------------------------
// World fixture
// ---------------------------------------------------------------------------

/// Facts about one resource in the synthetic world.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceFacts {
    #[serde(default)]
    pub tags: BTreeSet<String>,
    #[serde(default)]
    pub dependents: Vec<ResourceId>,
    #[serde(default)]
    pub routes_traffic: bool,
    #[serde(default)]
    pub owner: String,
}

/// Size parameters for a generated world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldSpec {
    /// `inst-NNNN`: dependency-free, traffic-free termination targets.
    pub safe_instances: usize,
    /// `svc-NNNN`: configuration mutation targets.
    pub services: usize,
    /// `prot-NNNN`: protected-tagged resources on dependency paths.
    pub protected_instances: usize,
    /// `edge-NNNN`: resources the world routes live traffic through.
    pub traffic_routers: usize,
}

/// The synthetic world context sources, the simulation world model, and
/// the substrate inventory are all derived from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldFixture {
    pub resources: BTreeMap<ResourceId, ResourceFacts>,
}

impl WorldFixture {
    pub fn from_spec(spec: &WorldSpec) -> Self {
        let mut resources = BTreeMap::new();
        for i in 0..spec.safe_instances {
            resources.insert(
                ResourceId::from(format!("inst-{i:04}").as_str()),
                ResourceFacts {
                    owner: format!("team-{}", i % 7),
                    ..ResourceFacts::default()
                },
            );
        }
        for i in 0..spec.services {
            resources.insert(
                ResourceId::from(format!("svc-{i:04}").as_str()),
                ResourceFacts {
                    owner: format!("team-{}", i % 7),
                    ..ResourceFacts::default()
                },
            );
        }
        for i in 0..spec.protected_instances {
            let id = ResourceId::from(format!("prot-{i:04}").as_str());
            resources.insert(
                id.clone(),
                ResourceFacts {
                    tags: [PROTECTED_TAG.to_string()].into(),
                    dependents: vec![ResourceId::from(format!("svc-{:04}", i % spec.services.max(1)).as_str())],
                    routes_traffic: false,
                    owner: "team-core".into(),
                },
            );
        }
        for i in 0..spec.traffic_routers {
            resources.insert(
                ResourceId::from(format!("edge-{i:04}").as_str()),
                ResourceFacts {
                    routes_traffic: true,
                    owner: "team-edge".into(),
                    ..ResourceFacts::default()
                },
            );
        }
        resources.insert(
            ResourceId::from(DRIFT_DECOY_RESOURCE),
            ResourceFacts {
                owner: "team-decoy".into(),
                ..ResourceFacts::default()
            },
        );
        WorldFixture { resources }
    }

    /// A small world, enough for unit tests.
    pub fn small() -> Self {
        Self::from_spec(&WorldSpec {
            safe_instances: 16,
            services: 8,
            protected_instances: 4,
            traffic_routers: 2,
        })
    }

    pub fn all_resources(&self) -> Vec<ResourceId> {
        self.resources.keys().cloned().collect()
    }

    fn with_prefix(&self, prefix: &str) -> Vec<ResourceId> {
        self.resources
            .keys()
            .filter(|r| r.as_str().starts_with(prefix))
            .cloned()
            .collect()
    }

    pub fn safe_instances(&self) -> Vec<ResourceId> {
        self.with_prefix("inst-")
    }

    pub fn services(&self) -> Vec<ResourceId> {
        self.with_prefix("svc-")
    }

    pub fn protected_resources(&self) -> Vec<ResourceId> {
        self.with_prefix("prot-")
    }

    pub fn traffic_routers(&self) -> Vec<ResourceId> {
        self.with_prefix("edge-")
    }

    /// The five context sources over this world, with per-domain faults.
    pub fn context_sources(
        &self,
        faults: BTreeMap<FactDomain, SourceFault>,
    ) -> Vec<Box<dyn ContextSource>> {
        let world = Arc::new(self.clone());
        FactDomain::ALL
            .into_iter()
            .map(|domain| {
                Box::new(FixtureSource {
                    source_id: format!("src-{domain}"),
                    domain,
                    world: Arc::clone(&world),
                    fault: faults.get(&domain).copied().unwrap_or_default(),
                }) as Box<dyn ContextSource>
            })
            .collect()
    }

    /// The simulation evaluator's world model, derived from the same facts.
    pub fn world_model(&self) -> WorldModel {
        WorldModel {
            routes_traffic: self
                .resources
                .iter()
                .filter(|(_, f)| f.routes_traffic)
                .map(|(r, _)| r.clone())
                .collect(),
            protected: self
                .resources
                .iter()
                .filter(|(_, f)| f.tags.contains(PROTECTED_TAG))
                .map(|(r, _)| r.clone())
                .collect(),
            destructive_actions: [ActionClass::from("TerminateInstance")].into(),
        }
    }

    /// Obligation signals: traffic intervals for routers, plus a standing
    /// incident so break-glass obligations are satisfiable.
    pub fn obligation_signals(&self) -> crate::broker::ObligationSignals {
        crate::broker::ObligationSignals {
            traffic_busy: self
                .resources
                .iter()
                .filter(|(_, f)| f.routes_traffic)
                .map(|(r, _)| (r.clone(), vec![(0, u64::MAX)]))
                .collect(),
            incident_active: vec![(0, u64::MAX)],
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_json(self, path)
    }
}

/// One fixture-backed context source for a single fact domain.
pub struct FixtureSource {
    source_id: String,
    domain: FactDomain,
    world: Arc<WorldFixture>,
    fault: SourceFault,
}

impl ContextSource for FixtureSource {
    fn source_id(&self) -> &str {
        &self.source_id
    }

    fn domain(&self) -> FactDomain {
        self.domain
    }

    fn query(&self, target: &ResourceId, now: LogicalTime) -> Option<Vec<ContextBinding>> {
        if self.fault == SourceFault::Missing {
            return None;
        }
        let captured_at = match self.fault {
            SourceFault::Stale => LogicalTime(now.ticks().saturating_sub(STALE_OFFSET_TICKS)),
            _ => now,
        };
        let facts = self.world.resources.get(target);
        let value = match self.domain {
            FactDomain::Dependencies => ContextValue::List(
                facts
                    .map(|f| f.dependents.iter().map(|d| d.as_str().to_string()).collect())
                    .unwrap_or_default(),
            ),
            FactDomain::Traffic => {
                ContextValue::Flag(facts.map(|f| f.routes_traffic).unwrap_or(false))
            }
            FactDomain::Ownership => ContextValue::Text(
                facts
                    .map(|f| f.owner.clone())
                    .filter(|o| !o.is_empty())
                    .unwrap_or_else(|| "unowned".into()),
            ),
            FactDomain::Protection => ContextValue::List(
                facts
                    .map(|f| f.tags.iter().cloned().collect())
                    .unwrap_or_default(),
            ),
            FactDomain::Incident => ContextValue::Text("degraded".into()),
        };
        Some(vec![ContextBinding {
            domain: self.domain,
            key: target.as_str().to_string(),
            value,
            source_id: self.source_id.clone(),
            captured_at,
        }])
    }
}

// ---------------------------------------------------------------------------
// Policy bundle
// ---------------------------------------------------------------------------

/// The default six-rule bundle. Order matters: protected rules first so
/// protected targeting can never fall through to a broader rule, then
/// break-glass, then the per-action rules.
pub fn policy_bundle() -> PolicyBundle {
    let rule = |rule_id: &str,
                match_when: RuleMatch,
                risk_class: RiskClass,
                profile: &str,
                validity_ticks: u64,
                obligations: &[&str]| PolicyRule {
        rule_id: rule_id.into(),
        match_when,
        risk_class,
        required_profile: ProfileId::from(profile),
        boundary_template: BoundaryTemplate {
            validity_ticks,
            obligations: obligations.iter().map(|s| s.to_string()).collect(),
        },
    };

    PolicyBundle {
        bundle_id: "governed-mutations".into(),
        version: "1.0.0".into(),
        protected_resource_markers: [PROTECTED_TAG.to_string()].into(),
        rules: vec![
            rule(
                "protected-guard",
                RuleMatch {
                    protected_target: Some(true),
                    lacks_parameter: Some(PROTECTED_AUTHORIZATION_PARAMETER.into()),
                    ..RuleMatch::default()
                },
                RiskClass::Protected,
                "protected",
                300,
                &["no-active-traffic"],
            ),
            rule(
                "protected-change",
                RuleMatch {
                    protected_target: Some(true),
                    requires_parameter: Some(PROTECTED_AUTHORIZATION_PARAMETER.into()),
                    ..RuleMatch::default()
                },
                RiskClass::Protected,
                "protected",
                300,
                &["no-active-traffic"],
            ),
            rule(
                "break-glass",
                RuleMatch {
                    requires_parameter: Some("break_glass".into()),
                    ..RuleMatch::default()
                },
                RiskClass::BreakGlass,
                "break_glass",
                300,
                &["incident-active"],
            ),
            rule(
                "destructive-termination",
                RuleMatch {
                    action: Some(ActionClass::from("TerminateInstance")),
                    ..RuleMatch::default()
                },
                RiskClass::High,
                "high",
                300,
                &["no-active-traffic"],
            ),
            rule(
                "config-mutation",
                RuleMatch {
                    action: Some(ActionClass::from("UpdateConfig")),
                    ..RuleMatch::default()
                },
                RiskClass::Low,
                "low",
                900,
                &[],
            ),
            rule(
                "service-restart",
                RuleMatch {
                    action: Some(ActionClass::from("RestartService")),
                    ..RuleMatch::default()
                },
                RiskClass::Low,
                "low",
                900,
                &[],
            ),
        ],
    }
}

// ---------------------------------------------------------------------------
// Governance profiles
// ---------------------------------------------------------------------------

/// The four default profiles. Low-risk mutations need 3 approvals from at
/// least 2 classes; high-risk need 4 from at least 3; protected adds veto
/// authority for the state and human-escalation evaluators; break-glass
/// lowers the quorum but narrows the identity lifetime to 120 ticks.
pub fn governance_profiles() -> GovernanceProfiles {
    let mut profiles = GovernanceProfiles::default();
    profiles.insert(GovernanceMetadata {
        profile_id: ProfileId::from("low"),
        quorum: 3,
        rejection_threshold: 2,
        veto_evaluators: BTreeSet::new(),
        required_classes: [EvaluatorClass::Policy, EvaluatorClass::State].into(),
        min_distinct_approving_classes: 2,
        freshness_window: FRESHNESS_WINDOW_TICKS,
        signature_threshold: 3,
        identity_lifetime: 600,
    });
    profiles.insert(GovernanceMetadata {
        profile_id: ProfileId::from("high"),
        quorum: 4,
        rejection_threshold: 2,
        veto_evaluators: BTreeSet::new(),
        required_classes: [
            EvaluatorClass::Policy,
            EvaluatorClass::State,
            EvaluatorClass::Risk,
        ]
        .into(),
        min_distinct_approving_classes: 3,
        freshness_window: FRESHNESS_WINDOW_TICKS,
        signature_threshold: 4,
        identity_lifetime: 300,
    });
    profiles.insert(GovernanceMetadata {
        profile_id: ProfileId::from("protected"),
        quorum: 4,
        rejection_threshold: 1,
        veto_evaluators: [
            EvaluatorId::from("state-1"),
            EvaluatorId::from("state-2"),
            EvaluatorId::from("human-1"),
        ]
        .into(),
        required_classes: [
            EvaluatorClass::Policy,
            EvaluatorClass::State,
            EvaluatorClass::HumanEscalation,
        ]
        .into(),
        min_distinct_approving_classes: 3,
        freshness_window: FRESHNESS_WINDOW_TICKS,
        signature_threshold: 4,
        identity_lifetime: 300,
    });
    profiles.insert(GovernanceMetadata {
        profile_id: ProfileId::from("break_glass"),
        quorum: 2,
        rejection_threshold: 2,
        veto_evaluators: [EvaluatorId::from("human-1")].into(),
        required_classes: [EvaluatorClass::Policy, EvaluatorClass::State].into(),
        min_distinct_approving_classes: 2,
        freshness_window: FRESHNESS_WINDOW_TICKS,
        signature_threshold: 2,
        identity_lifetime: 120,
    });
    profiles
}

// ---------------------------------------------------------------------------
// Evaluator registry and swarm
// ---------------------------------------------------------------------------

/// The default registry: 7 evaluators across 5 classes — 2 policy,
/// 2 state, 1 risk, 1 simulation, 1 human-escalation adapter.
pub fn registry() -> Vec<EvaluatorRegistration> {
    let entry = |id: &str, class: EvaluatorClass| EvaluatorRegistration {
        evaluator_id: EvaluatorId::from(id),
        evaluator_class: class,
        fault_mode: FaultMode::Honest,
        public_key: None,
    };
    vec![
        entry("policy-1", EvaluatorClass::Policy),
        entry("policy-2", EvaluatorClass::Policy),
        entry("state-1", EvaluatorClass::State),
        entry("state-2", EvaluatorClass::State),
        entry("risk-1", EvaluatorClass::Risk),
        entry("sim-1", EvaluatorClass::Simulation),
        entry("human-1", EvaluatorClass::HumanEscalation),
    ]
}

/// Default risk evaluator limits: one resource per high-stakes approval,
/// three for low-risk; irreversible actions only under the elevated
/// profiles.
pub fn risk_config() -> RiskEvaluatorConfig {
    RiskEvaluatorConfig {
        blast_radius_caps: [
            (RiskClass::Low, 3),
            (RiskClass::High, 1),
            (RiskClass::Protected, 1),
            (RiskClass::BreakGlass, 1),
        ]
        .into(),
        irreversible_allowed: [RiskClass::High, RiskClass::Protected, RiskClass::BreakGlass].into(),
        irreversible_actions: [ActionClass::from("TerminateInstance")].into(),
    }
}

pub fn policy_evaluator() -> PolicyEvaluator {
    let bundle = policy_bundle();
    PolicyEvaluator {
        bundle_version: bundle.version.clone(),
        bundle_digest: bundle.digest(),
        protected_authorization_parameter: PROTECTED_AUTHORIZATION_PARAMETER.into(),
    }
}

pub fn risk_evaluator() -> RiskEvaluator {
    RiskEvaluator {
        config: risk_config(),
    }
}

fn behavior_for(
    class: EvaluatorClass,
    bundle: &PolicyBundle,
    world: &WorldFixture,
    queued_verdicts: &BTreeMap<String, AttestationDecision>,
) -> Box<dyn EvaluatorBehavior> {
    match class {
        EvaluatorClass::Policy => Box::new(PolicyEvaluator {
            bundle_version: bundle.version.clone(),
            bundle_digest: bundle.digest(),
            protected_authorization_parameter: PROTECTED_AUTHORIZATION_PARAMETER.into(),
        }),
        EvaluatorClass::State => Box::new(StateEvaluator {
            freshness_window: FRESHNESS_WINDOW_TICKS,
        }),
        EvaluatorClass::Risk => Box::new(RiskEvaluator {
            config: risk_config(),
        }),
        EvaluatorClass::Simulation => Box::new(SimulationEvaluator {
            world: Arc::new(world.world_model()),
        }),
        EvaluatorClass::HumanEscalation => Box::new(HumanEscalationAdapter {
            queued_verdicts: queued_verdicts.clone(),
        }),
    }
}

/// Wire a swarm from registrations: keys derived from the seed, behaviors
/// from the class fixtures.
pub fn swarm_for(
    seed: u64,
    registrations: &[EvaluatorRegistration],
    bundle: &PolicyBundle,
    world: &WorldFixture,
    queued_verdicts: &BTreeMap<String, AttestationDecision>,
) -> Swarm {
    let members = registrations
        .iter()
        .map(|reg| SwarmMember {
            registration: reg.clone(),
            key: EvaluatorKey::derive(seed, reg.evaluator_id.as_str()),
            behavior: behavior_for(reg.evaluator_class, bundle, world, queued_verdicts),
        })
        .collect();
    Swarm::new(members)
}

/// Default swarm over the small world.
pub fn swarm(seed: u64) -> Swarm {
    swarm_for(
        seed,
        &registry(),
        &policy_bundle(),
        &WorldFixture::small(),
        &BTreeMap::new(),
    )
}

// ---------------------------------------------------------------------------
// Alias table
// ---------------------------------------------------------------------------

pub fn alias_table() -> AliasTable {
    AliasTable {
        action_aliases: [
            ("terminate-instance", "TerminateInstance"),
            ("ec2:TerminateInstances", "TerminateInstance"),
            ("update-config", "UpdateConfig"),
            ("config.update", "UpdateConfig"),
            ("restart-service", "RestartService"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect(),
        resource_aliases: BTreeMap::new(),
    }
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_digest_is_stable_across_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.json");
        save_json(&policy_bundle(), &path).unwrap();
        let first: PolicyBundle = load_json(&path).unwrap();
        let second: PolicyBundle = load_json(&path).unwrap();
        assert_eq!(first.digest(), second.digest());
        assert_eq!(first.digest(), policy_bundle().digest());
    }

    #[test]
    fn profiles_validate_against_default_registry() {
        governance_profiles().validate(registry().len()).unwrap();
    }

    #[test]
    fn stale_source_exceeds_freshness_window() {
        let world = WorldFixture::small();
        let mut faults = BTreeMap::new();
        faults.insert(FactDomain::Traffic, SourceFault::Stale);
        let sources = world.context_sources(faults);
        let traffic = sources
            .iter()
            .find(|s| s.domain() == FactDomain::Traffic)
            .unwrap();
        let now = LogicalTime(1000);
        let bindings = traffic.query(&ResourceId::from("inst-0000"), now).unwrap();
        let age = now.age_of(bindings[0].captured_at);
        assert!(age > FRESHNESS_WINDOW_TICKS);
    }

    #[test]
    fn world_covers_all_resource_roles() {
        let world = WorldFixture::small();
        assert!(!world.safe_instances().is_empty());
        assert!(!world.services().is_empty());
        assert!(!world.protected_resources().is_empty());
        assert!(!world.traffic_routers().is_empty());
        assert!(world
            .resources
            .contains_key(&ResourceId::from(DRIFT_DECOY_RESOURCE)));
    }
}
