//! Run configuration: file schema, validation, and resolution into the
//! harness inputs.
//!
//! Every referenced file must exist and parse before any pipeline work
//! begins; a bad path fails fast with the offending location and no
//! partial outputs.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use proofgate::engine::AliasTable;
use proofgate::harness::fixtures::{self, load_json, WorldFixture};
use proofgate::harness::{BaselineConfig, HarnessConfig, RunOptions, WorkloadSpec};
use proofgate::model::{AttestationDecision, GovernanceProfiles, PolicyBundle};
use proofgate::swarm::EvaluatorRegistration;

/// The run configuration file. All path fields are optional; omitted
/// ones fall back to the built-in defaults (which are the same objects
/// shipped in `fixtures/`). Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub policy_bundle: Option<PathBuf>,
    pub governance_profiles: Option<PathBuf>,
    pub evaluator_registry: Option<PathBuf>,
    pub alias_table: Option<PathBuf>,
    pub context_fixture: Option<PathBuf>,
    pub queued_verdicts: Option<PathBuf>,
    pub workload_spec: Option<PathBuf>,
    pub seed: Option<u64>,
    pub scale: Option<f64>,
    pub repetitions: Option<u32>,
    pub receipt_loss_rate: Option<f64>,
    pub collection_deadline_ms: Option<u64>,
    pub baseline: Option<BaselineConfig>,
}

/// Everything a command needs, resolved and validated.
pub struct ResolvedSetup {
    pub harness: HarnessConfig,
    pub workload: WorkloadSpec,
    pub options: RunOptions,
    pub baseline: BaselineConfig,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

impl ResolvedSetup {
    pub fn load(
        config_path: Option<&Path>,
        seed_override: Option<u64>,
        scale_override: Option<f64>,
        repetitions_override: Option<u32>,
    ) -> Result<ResolvedSetup> {
        let (file, base): (RunConfigFile, PathBuf) = match config_path {
            Some(path) => {
                let file: RunConfigFile = load_json(path)
                    .with_context(|| format!("loading config {}", path.display()))?;
                let base = path
                    .parent()
                    .map(|p| p.to_path_buf())
                    .unwrap_or_else(|| PathBuf::from("."));
                (file, base)
            }
            None => (RunConfigFile::default(), PathBuf::from(".")),
        };

        let seed = seed_override.or(file.seed).unwrap_or(7);

        let mut workload = match &file.workload_spec {
            Some(path) => load_json::<WorkloadSpec>(&resolve(&base, path))
                .with_context(|| format!("loading workload spec {}", path.display()))?,
            None => WorkloadSpec::desk_default(seed),
        };
        workload.seed = seed;
        if let Some(scale) = scale_override {
            workload = workload.scaled(scale / workload.scale.max(f64::MIN_POSITIVE));
        }
        workload
            .validate()
            .context("validating the workload spec")?;

        let bundle: PolicyBundle = match &file.policy_bundle {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading policy bundle {}", path.display()))?,
            None => fixtures::policy_bundle(),
        };
        let profiles: GovernanceProfiles = match &file.governance_profiles {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading governance profiles {}", path.display()))?,
            None => fixtures::governance_profiles(),
        };
        let registrations: Vec<EvaluatorRegistration> = match &file.evaluator_registry {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading evaluator registry {}", path.display()))?,
            None => fixtures::registry(),
        };
        let aliases: AliasTable = match &file.alias_table {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading alias table {}", path.display()))?,
            None => fixtures::alias_table(),
        };
        let world: WorldFixture = match &file.context_fixture {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading context fixture {}", path.display()))?,
            None => WorldFixture::from_spec(&workload.world_spec()),
        };
        let queued_verdicts: BTreeMap<String, AttestationDecision> = match &file.queued_verdicts {
            Some(path) => load_json(&resolve(&base, path))
                .with_context(|| format!("loading queued verdicts {}", path.display()))?,
            None => BTreeMap::new(),
        };

        let harness = HarnessConfig {
            world,
            bundle,
            aliases,
            profiles,
            registrations,
            queued_verdicts,
        };
        harness.validate().context("validating the harness setup")?;

        let options = RunOptions {
            seed,
            repetitions: repetitions_override.or(file.repetitions).unwrap_or(5),
            receipt_loss_rate: file.receipt_loss_rate.unwrap_or(0.0),
            collection_deadline_ms: file.collection_deadline_ms.unwrap_or(2_000),
            ablation: None,
        };

        Ok(ResolvedSetup {
            harness,
            workload,
            options,
            baseline: file.baseline.unwrap_or_default(),
        })
    }
}
