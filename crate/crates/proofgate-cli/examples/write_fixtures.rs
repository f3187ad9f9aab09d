//! Writes the default fixture set to a directory (default `fixtures/`):
//! policy bundle, governance profiles, evaluator registry, alias table,
//! context fixture, queued verdicts, workload spec, and a run config
//! wiring them together.
//!
//! ```text
//! cargo run -p proofgate-cli --example write_fixtures [dir]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use proofgate::harness::fixtures;
use proofgate::harness::{WorkloadSpec, WorldFixture};
use proofgate::model::AttestationDecision;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "fixtures".to_string()),
    );
    std::fs::create_dir_all(&dir)?;

    let workload = WorkloadSpec::desk_default(7);
    fixtures::save_json(&workload, &dir.join("workload_spec.json"))?;
    fixtures::save_json(&fixtures::policy_bundle(), &dir.join("policy_bundle.json"))?;
    fixtures::save_json(
        &fixtures::governance_profiles(),
        &dir.join("governance_profiles.json"),
    )?;
    fixtures::save_json(&fixtures::registry(), &dir.join("evaluator_registry.json"))?;
    fixtures::save_json(&fixtures::alias_table(), &dir.join("alias_table.json"))?;
    fixtures::save_json(
        &WorldFixture::from_spec(&workload.world_spec()),
        &dir.join("context_fixture.json"),
    )?;
    let queued: BTreeMap<String, AttestationDecision> = BTreeMap::new();
    fixtures::save_json(&queued, &dir.join("queued_verdicts.json"))?;

    let config = serde_json::json!({
        "policy_bundle": "policy_bundle.json",
        "governance_profiles": "governance_profiles.json",
        "evaluator_registry": "evaluator_registry.json",
        "alias_table": "alias_table.json",
        "context_fixture": "context_fixture.json",
        "queued_verdicts": "queued_verdicts.json",
        "workload_spec": "workload_spec.json",
        "seed": 7,
        "repetitions": 5,
        "receipt_loss_rate": 0.0
    });
    let mut text = serde_json::to_string_pretty(&config)?;
    text.push('\n');
    std::fs::write(dir.join("run_config.json"), text)?;

    println!("fixtures written to {}", dir.display());
    Ok(())
}
