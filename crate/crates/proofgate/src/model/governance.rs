//! Governance metadata: the per-risk-class consensus parameters.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::attestation::EvaluatorClass;
use super::ids::{EvaluatorId, ProfileId};
use crate::error::{Error, Result};

/// Consensus parameters for one governance profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernanceMetadata {
    pub profile_id: ProfileId,
    /// Minimum approvals (k).
    pub quorum: u32,
    /// Rejections that force a reject outcome (r).
    pub rejection_threshold: u32,
    /// Evaluators with veto power for this mutation class.
    pub veto_evaluators: BTreeSet<EvaluatorId>,
    /// Classes that must produce a well-formed attestation.
    pub required_classes: BTreeSet<EvaluatorClass>,
    /// Diversity floor: distinct classes required among approvals (d).
    pub min_distinct_approving_classes: u32,
    /// Maximum snapshot age, in ticks, at decision time.
    pub freshness_window: u64,
    /// Valid signatures required before a decision may progress (m-of-n).
    pub signature_threshold: u32,
    /// Maximum identity lifetime the broker may issue under this profile,
    /// in ticks; used to narrow the proof boundary at issuance.
    pub identity_lifetime: u64,
}

impl GovernanceMetadata {
    /// Structural invariants: `1 ≤ k ≤ n`, `r ≥ 1`, `d ≤ k`.
    pub fn validate(&self, registered_evaluators: usize) -> Result<()> {
        if self.quorum == 0 || self.quorum as usize > registered_evaluators {
            return Err(Error::Config(format!(
                "profile {}: quorum {} outside 1..={registered_evaluators}",
                self.profile_id, self.quorum
            )));
        }
        if self.rejection_threshold == 0 {
            return Err(Error::Config(format!(
                "profile {}: rejection threshold must be at least 1",
                self.profile_id
            )));
        }
        if self.min_distinct_approving_classes > self.quorum {
            return Err(Error::Config(format!(
                "profile {}: diversity floor {} exceeds quorum {}",
                self.profile_id, self.min_distinct_approving_classes, self.quorum
            )));
        }
        Ok(())
    }
}

/// The profile set loaded from the governance profiles file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernanceProfiles {
    pub profiles: BTreeMap<ProfileId, GovernanceMetadata>,
}

impl GovernanceProfiles {
    pub fn get(&self, id: &ProfileId) -> Option<&GovernanceMetadata> {
        self.profiles.get(id)
    }

    pub fn insert(&mut self, profile: GovernanceMetadata) {
        self.profiles.insert(profile.profile_id.clone(), profile);
    }

    pub fn validate(&self, registered_evaluators: usize) -> Result<()> {
        for profile in self.profiles.values() {
            profile.validate(registered_evaluators)?;
        }
        Ok(())
    }
}
