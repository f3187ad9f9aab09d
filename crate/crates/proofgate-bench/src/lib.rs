//! Shared setup for the stage benchmarks: a small world, a ready swarm,
//! and an approved proof to feed each stage in isolation.

use std::collections::BTreeMap;
use std::time::Duration;

use proofgate::consensus::{decide, ConsensusInput};
use proofgate::engine::construct_proof;
use proofgate::harness::fixtures;
use proofgate::model::{
    AttestationSlot, Decision, GovernanceMetadata, JustificationProof, RawIntent,
};
use proofgate::swarm::{collect_attestations, Swarm};
use proofgate::time::LogicalTime;

pub struct BenchWorld {
    pub world: fixtures::WorldFixture,
    pub bundle: proofgate::model::PolicyBundle,
    pub aliases: proofgate::engine::AliasTable,
    pub swarm: Swarm,
    pub profile: GovernanceMetadata,
}

impl BenchWorld {
    pub fn new() -> Self {
        let world = fixtures::WorldFixture::small();
        let bundle = fixtures::policy_bundle();
        let swarm = fixtures::swarm_for(
            7,
            &fixtures::registry(),
            &bundle,
            &world,
            &BTreeMap::new(),
        );
        let profiles = fixtures::governance_profiles();
        let profile = profiles
            .get(&proofgate::model::ProfileId::from("high"))
            .expect("high profile exists")
            .clone();
        BenchWorld {
            world,
            bundle,
            aliases: fixtures::alias_table(),
            swarm,
            profile,
        }
    }

    pub fn raw_intent(&self, target: &str) -> RawIntent {
        RawIntent {
            intent_id: format!("i-bench-{target}"),
            action: "terminate-instance".into(),
            targets: vec![target.into()],
            parameters: BTreeMap::new(),
            proposer: "agent-bench".into(),
            submitted_at: LogicalTime(100),
        }
    }

    pub fn proof(&self, target: &str) -> JustificationProof {
        let sources = self.world.context_sources(Default::default());
        construct_proof(
            &self.raw_intent(target),
            &self.aliases,
            &sources,
            &self.bundle,
            LogicalTime(100),
        )
        .expect("bench intent constructs")
    }

    pub fn attested(&self, proof: &JustificationProof) -> Vec<AttestationSlot> {
        collect_attestations(
            proof,
            &self.swarm,
            &BTreeMap::new(),
            Duration::from_secs(2),
            LogicalTime(101),
        )
    }

    pub fn decision(&self, slots: &[AttestationSlot]) -> Decision {
        decide(&ConsensusInput {
            slots: slots.to_vec(),
            profile: self.profile.clone(),
            proof_freshness: 1,
        })
    }
}

impl Default for BenchWorld {
    fn default() -> Self {
        Self::new()
    }
}
