//! Proof construction: normalize, bind context, evaluate policy, derive
//! boundary, and compose the four steps into a justification proof.
//!
//! Construction is deny-by-default: an intent matching no policy rule
//! still produces a proof, but with an empty boundary that permits no
//! issuance. Absent context is encoded as explicit markers, never erased,
//! so evaluators can see what was missing.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::mpsc;
use std::thread;

use crate::error::{Error, Result};
use crate::model::{
    Boundary, ContextBinding, ContextSnapshot, ContextValue, FactDomain, Intent,
    JustificationProof, PolicyBasis, PolicyBundle, ProfileId, RawIntent, ResourceId,
    RiskAssessment, RiskClass, ValidityWindow,
};
use crate::time::LogicalTime;

// ---------------------------------------------------------------------------
// Alias table
// ---------------------------------------------------------------------------

/// Maps tool-specific action and resource names to canonical forms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasTable {
    #[serde(default)]
    pub action_aliases: BTreeMap<String, String>,
    #[serde(default)]
    pub resource_aliases: BTreeMap<String, String>,
}

impl AliasTable {
    fn canonical_action(&self, raw: &str) -> String {
        self.action_aliases
            .get(raw)
            .cloned()
            .unwrap_or_else(|| raw.to_string())
    }

    fn canonical_resource(&self, raw: &str) -> String {
        self.resource_aliases
            .get(raw)
            .cloned()
            .unwrap_or_else(|| raw.to_string())
    }
}

// ---------------------------------------------------------------------------
// Context sources
// ---------------------------------------------------------------------------

/// Harness-controlled availability of a context source.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum SourceFault {
    #[default]
    Healthy,
    /// Facts carry capture timestamps older than any freshness window.
    Stale,
    /// The source is unreachable; binding yields absence markers.
    Missing,
}

/// A queryable provider of context facts for one domain.
///
/// `query` returning `None` means the source could not answer at all;
/// binding records an explicit absence marker in that case.
pub trait ContextSource: Send + Sync {
    fn source_id(&self) -> &str;
    fn domain(&self) -> FactDomain;
    fn query(&self, target: &ResourceId, now: LogicalTime) -> Option<Vec<ContextBinding>>;
}

// ---------------------------------------------------------------------------
// Normalize
// ---------------------------------------------------------------------------

/// Resolve aliases, sort parameters, and validate the intent schema.
///
/// Idempotent: normalizing an already-canonical intent changes nothing.
pub fn normalize(raw: &RawIntent, aliases: &AliasTable) -> Result<Intent> {
    if raw.intent_id.trim().is_empty() {
        return Err(Error::Normalization("intent_id is empty".into()));
    }
    let action = aliases.canonical_action(raw.action.trim());
    if action.is_empty() {
        return Err(Error::Normalization(format!(
            "intent {}: action is empty after normalization",
            raw.intent_id
        )));
    }
    let targets: Vec<ResourceId> = raw
        .targets
        .iter()
        .map(|t| aliases.canonical_resource(t.trim()))
        .filter(|t| !t.is_empty())
        .map(ResourceId::new)
        .collect();
    if targets.is_empty() {
        return Err(Error::Normalization(format!(
            "intent {}: no targets after normalization",
            raw.intent_id
        )));
    }
    Ok(Intent {
        intent_id: raw.intent_id.clone().into(),
        action: action.into(),
        targets,
        // BTreeMap keeps parameters key-sorted by construction.
        parameters: raw.parameters.clone(),
        proposer: raw.proposer.clone(),
        submitted_at: raw.submitted_at,
    })
}

// ---------------------------------------------------------------------------
// BindContext
// ---------------------------------------------------------------------------

/// Query every registered source for every target, concurrently, and
/// assemble the bound snapshot.
///
/// A domain whose source answers nothing — or that has no registered
/// source at all — is bound as an explicit absence marker, so missing
/// dependency context is visible to evaluators rather than silently
/// dropped. Binding itself never fails: absence and staleness are
/// evaluator and consensus concerns.
pub fn bind_context(
    intent: &Intent,
    sources: &[Box<dyn ContextSource>],
    now: LogicalTime,
) -> ContextSnapshot {
    let mut bindings: Vec<ContextBinding> = Vec::new();
    let (tx, rx) = mpsc::channel::<Vec<ContextBinding>>();

    thread::scope(|scope| {
        for source in sources {
            for target in &intent.targets {
                let tx = tx.clone();
                scope.spawn(move || {
                    let batch = source.query(target, now).unwrap_or_else(|| {
                        vec![ContextBinding {
                            domain: source.domain(),
                            key: target.as_str().to_string(),
                            value: ContextValue::Absent,
                            source_id: source.source_id().to_string(),
                            captured_at: now,
                        }]
                    });
                    let _ = tx.send(batch);
                });
            }
        }
        drop(tx);
        while let Ok(batch) = rx.recv() {
            bindings.extend(batch);
        }
    });

    // Domains nobody covers are still bound, as absence markers.
    for domain in FactDomain::ALL {
        if !sources.iter().any(|s| s.domain() == domain) {
            for target in &intent.targets {
                bindings.push(ContextBinding {
                    domain,
                    key: target.as_str().to_string(),
                    value: ContextValue::Absent,
                    source_id: "unregistered".to_string(),
                    captured_at: now,
                });
            }
        }
    }

    ContextSnapshot::assemble(bindings)
}

// ---------------------------------------------------------------------------
// EvaluatePolicy
// ---------------------------------------------------------------------------

/// Whether any target carries a protected marker according to the
/// snapshot's protection bindings and the bundle's marker set.
pub fn protected_target(snapshot: &ContextSnapshot, bundle: &PolicyBundle) -> bool {
    snapshot
        .domain_bindings(FactDomain::Protection)
        .any(|b| match &b.value {
            ContextValue::List(tags) => tags
                .iter()
                .any(|t| bundle.protected_resource_markers.contains(t)),
            _ => false,
        })
}

fn rule_matches(
    rule: &crate::model::PolicyRule,
    intent: &Intent,
    target_is_protected: bool,
) -> bool {
    let m = &rule.match_when;
    if let Some(action) = &m.action {
        if action != &intent.action {
            return false;
        }
    }
    if let Some(protected) = m.protected_target {
        if protected != target_is_protected {
            return false;
        }
    }
    if let Some(param) = &m.requires_parameter {
        if !intent.has_parameter(param) {
            return false;
        }
    }
    if let Some(param) = &m.lacks_parameter {
        if intent.has_parameter(param) {
            return false;
        }
    }
    true
}

/// Evaluate the bundle against the snapshot and intent.
///
/// Records every matching rule in bundle order; the first match drives
/// the assessment. Protected markers force `risk_class = protected`
/// regardless of what the deciding rule says. No match yields a
/// deny-by-default basis whose boundary will be empty.
pub fn evaluate_policy(
    snapshot: &ContextSnapshot,
    bundle: &PolicyBundle,
    intent: &Intent,
) -> (PolicyBasis, RiskAssessment) {
    let is_protected = protected_target(snapshot, bundle);
    let matched: Vec<&crate::model::PolicyRule> = bundle
        .rules
        .iter()
        .filter(|r| rule_matches(r, intent, is_protected))
        .collect();

    let basis = PolicyBasis {
        bundle_id: bundle.bundle_id.clone(),
        bundle_version: bundle.version.clone(),
        bundle_digest: bundle.digest(),
        matched_rule_ids: matched.iter().map(|r| r.rule_id.clone()).collect(),
    };

    let mut rationale = Vec::new();
    let (mut risk_class, mut profile) = match matched.first() {
        Some(rule) => {
            rationale.push(format!("RULE_{}", rule.rule_id.to_uppercase()));
            (rule.risk_class, rule.required_profile.clone())
        }
        None => {
            rationale.push("NO_RULE_MATCHED".to_string());
            (RiskClass::Low, ProfileId::from("low"))
        }
    };
    if is_protected {
        // Invariant: protected markers always force the protected class.
        risk_class = RiskClass::Protected;
        profile = ProfileId::from("protected");
        rationale.push("PROTECTED_TARGET".to_string());
    }

    (
        basis,
        RiskAssessment {
            risk_class,
            rationale_codes: rationale,
            required_profile: profile,
        },
    )
}

// ---------------------------------------------------------------------------
// DeriveBoundary
// ---------------------------------------------------------------------------

/// Instantiate the boundary from the deciding rule's template: the
/// intent's single action class, its exact target set, a validity window
/// anchored at `anchor`, and the template obligations. A deny-by-default
/// basis yields the empty boundary.
pub fn derive_boundary(
    basis: &PolicyBasis,
    _risk: &RiskAssessment,
    bundle: &PolicyBundle,
    intent: &Intent,
    anchor: LogicalTime,
) -> Boundary {
    let Some(rule_id) = basis.deciding_rule_id() else {
        return Boundary::empty_at(anchor);
    };
    let Some(rule) = bundle.rules.iter().find(|r| r.rule_id == rule_id) else {
        return Boundary::empty_at(anchor);
    };
    let template = &rule.boundary_template;
    Boundary {
        actions: [intent.action.clone()].into(),
        resources: intent.targets.iter().cloned().collect(),
        validity: ValidityWindow {
            not_before: anchor,
            not_after: anchor.plus(template.validity_ticks),
        },
        obligations: template.obligations.clone(),
    }
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Run the four construction steps in order and assemble the proof.
///
/// A proof is produced even when the boundary is empty; evaluators then
/// reject it. Only a normalization failure propagates as an error.
pub fn construct_proof(
    raw: &RawIntent,
    aliases: &AliasTable,
    sources: &[Box<dyn ContextSource>],
    bundle: &PolicyBundle,
    now: LogicalTime,
) -> Result<JustificationProof> {
    let intent = normalize(raw, aliases)?;
    let snapshot = bind_context(&intent, sources, now);
    let (basis, risk) = evaluate_policy(&snapshot, bundle, &intent);
    let boundary = derive_boundary(&basis, &risk, bundle, &intent, now);
    let proof_hash = JustificationProof::body_hash(&intent, &snapshot, &basis, &risk, &boundary);
    Ok(JustificationProof {
        proof_id: format!("jp-{}", intent.intent_id),
        mutation: intent,
        snapshot,
        policy_basis: basis,
        risk,
        boundary,
        constructed_at: now,
        proof_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures;

    fn raw(action: &str, target: &str) -> RawIntent {
        RawIntent {
            intent_id: "i-1".into(),
            action: action.into(),
            targets: vec![target.into()],
            parameters: BTreeMap::new(),
            proposer: "agent-1".into(),
            submitted_at: LogicalTime(10),
        }
    }

    #[test]
    fn normalize_resolves_action_aliases() {
        let intent = normalize(&raw("terminate-instance", "inst-1"), &fixtures::alias_table())
            .unwrap();
        assert_eq!(intent.action.as_str(), "TerminateInstance");
        assert_eq!(intent.targets[0].as_str(), "inst-1");
    }

    #[test]
    fn normalize_is_idempotent_on_canonical_intents() {
        let aliases = fixtures::alias_table();
        let first = normalize(&raw("TerminateInstance", "inst-1"), &aliases).unwrap();
        let again = normalize(
            &RawIntent {
                intent_id: first.intent_id.as_str().into(),
                action: first.action.as_str().into(),
                targets: first.targets.iter().map(|t| t.as_str().into()).collect(),
                parameters: first.parameters.clone(),
                proposer: first.proposer.clone(),
                submitted_at: first.submitted_at,
            },
            &aliases,
        )
        .unwrap();
        assert_eq!(first, again);
    }

    #[test]
    fn normalize_rejects_empty_targets() {
        let mut bad = raw("TerminateInstance", "  ");
        bad.targets = vec!["  ".into()];
        assert!(matches!(
            normalize(&bad, &AliasTable::default()),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn no_rule_match_yields_empty_boundary() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let sources = world.context_sources(Default::default());
        let proof = construct_proof(
            &raw("UnknownAction", "inst-0000"),
            &aliases,
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        assert!(proof.policy_basis.deny_by_default());
        assert!(!proof.boundary.issuable());
        assert!(proof.hash_verifies());
    }

    #[test]
    fn construction_is_deterministic_against_frozen_sources() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let sources = world.context_sources(Default::default());
        let a = construct_proof(
            &raw("terminate-instance", "inst-0000"),
            &aliases,
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        let b = construct_proof(
            &raw("terminate-instance", "inst-0000"),
            &aliases,
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        assert_eq!(a.proof_hash, b.proof_hash);
        assert_eq!(a.snapshot.snapshot_digest, b.snapshot.snapshot_digest);
    }

    #[test]
    fn composition_equals_individual_steps() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let sources = world.context_sources(Default::default());
        let now = LogicalTime(10);
        let raw_intent = raw("terminate-instance", "inst-0000");

        let proof = construct_proof(&raw_intent, &aliases, &sources, &bundle, now).unwrap();

        let intent = normalize(&raw_intent, &aliases).unwrap();
        let snapshot = bind_context(&intent, &sources, now);
        let (basis, risk) = evaluate_policy(&snapshot, &bundle, &intent);
        let boundary = derive_boundary(&basis, &risk, &bundle, &intent, now);

        assert_eq!(proof.mutation, intent);
        assert_eq!(proof.snapshot, snapshot);
        assert_eq!(proof.policy_basis, basis);
        assert_eq!(proof.risk, risk);
        assert_eq!(proof.boundary, boundary);
    }

    #[test]
    fn missing_dependency_source_binds_absence_marker() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let mut faults = BTreeMap::new();
        faults.insert(FactDomain::Dependencies, SourceFault::Missing);
        let sources = world.context_sources(faults);
        let proof = construct_proof(
            &raw("TerminateInstance", "inst-0000"),
            &aliases,
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        assert!(proof.snapshot.domain_absent(FactDomain::Dependencies));
        assert!(!proof.snapshot.domain_absent(FactDomain::Traffic));
    }

    #[test]
    fn termination_boundary_follows_the_rule_template() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let sources = world.context_sources(Default::default());
        let proof = construct_proof(
            &raw("TerminateInstance", "inst-0000"),
            &fixtures::alias_table(),
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        let b = &proof.boundary;
        assert_eq!(
            b.actions.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            vec!["TerminateInstance"]
        );
        assert_eq!(
            b.resources.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
            vec!["inst-0000"]
        );
        // 5-minute window in ticks, anchored at construction time.
        assert_eq!(b.validity.not_before, LogicalTime(10));
        assert_eq!(b.validity.not_after, LogicalTime(310));
        assert_eq!(
            b.obligations.iter().cloned().collect::<Vec<_>>(),
            vec!["no-active-traffic"]
        );
    }

    #[test]
    fn matched_rule_sets_equal_bruteforce_scan_over_generated_intents() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let sources = world.context_sources(Default::default());
        let actions = [
            "TerminateInstance",
            "UpdateConfig",
            "RestartService",
            "UnknownAction",
        ];
        let protected = world.protected_resources();

        for i in 0..50u64 {
            let target = if i % 5 == 0 {
                protected[(i as usize / 5) % protected.len()].as_str().to_string()
            } else {
                format!("inst-{:04}", i % 16)
            };
            let mut parameters = BTreeMap::new();
            if i % 3 == 0 {
                parameters.insert("break_glass".into(), "true".into());
            }
            if i % 7 == 0 {
                parameters.insert("change_ticket".into(), format!("CHG-{i}"));
            }
            let raw_intent = RawIntent {
                intent_id: format!("i-scan-{i}"),
                action: actions[(i % 4) as usize].into(),
                targets: vec![target],
                parameters,
                proposer: "agent-scan".into(),
                submitted_at: LogicalTime(10 + i),
            };
            let intent = normalize(&raw_intent, &aliases).unwrap();
            let snapshot = bind_context(&intent, &sources, LogicalTime(10 + i));
            let (basis, risk) = evaluate_policy(&snapshot, &bundle, &intent);

            // Independent scan: test every rule's predicate directly.
            let target_protected = snapshot
                .domain_bindings(FactDomain::Protection)
                .any(|b| matches!(&b.value, crate::model::ContextValue::List(tags)
                    if tags.iter().any(|t| bundle.protected_resource_markers.contains(t))));
            let expected: Vec<String> = bundle
                .rules
                .iter()
                .filter(|rule| {
                    let m = &rule.match_when;
                    m.action.as_ref().is_none_or(|a| *a == intent.action)
                        && m.protected_target.is_none_or(|p| p == target_protected)
                        && m.requires_parameter
                            .as_ref()
                            .is_none_or(|p| intent.parameters.contains_key(p))
                        && m.lacks_parameter
                            .as_ref()
                            .is_none_or(|p| !intent.parameters.contains_key(p))
                })
                .map(|rule| rule.rule_id.clone())
                .collect();
            assert_eq!(basis.matched_rule_ids, expected, "intent {i}");

            // The derived boundary never exceeds the deciding template's
            // maximum for this intent.
            let boundary = derive_boundary(&basis, &risk, &bundle, &intent, LogicalTime(10 + i));
            if let Some(rule_id) = basis.deciding_rule_id() {
                let rule = bundle.rules.iter().find(|r| r.rule_id == rule_id).unwrap();
                let template_max = Boundary {
                    actions: [intent.action.clone()].into(),
                    resources: intent.targets.iter().cloned().collect(),
                    validity: ValidityWindow {
                        not_before: LogicalTime(10 + i),
                        not_after: LogicalTime(10 + i).plus(rule.boundary_template.validity_ticks),
                    },
                    obligations: rule.boundary_template.obligations.clone(),
                };
                assert!(crate::model::boundary_contains(&boundary, &template_max));
            } else {
                assert!(!boundary.issuable());
            }
        }
    }

    #[test]
    fn protected_marker_forces_protected_risk_class() {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let aliases = fixtures::alias_table();
        let sources = world.context_sources(Default::default());
        let protected_id = world.protected_resources()[0].as_str().to_string();
        let proof = construct_proof(
            &raw("TerminateInstance", &protected_id),
            &aliases,
            &sources,
            &bundle,
            LogicalTime(10),
        )
        .unwrap();
        assert_eq!(proof.risk.risk_class, RiskClass::Protected);
        assert_eq!(proof.risk.required_profile.as_str(), "protected");
    }
}
