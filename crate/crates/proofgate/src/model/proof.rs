//! The justification proof: the stable authorization object.

use serde::{Deserialize, Serialize};

use super::boundary::Boundary;
use super::context::ContextSnapshot;
use super::intent::Intent;
use super::policy::{PolicyBasis, RiskAssessment};
use crate::canonical::canonical_digest;
use crate::digest::Digest256;
use crate::time::LogicalTime;

/// The five-field authorization artifact evaluators attest over and
/// auditors replay: mutation (M), snapshot (S), policy basis (Π), risk
/// (R), and boundary (B), anchored by a hash over their canonical form.
///
/// Every authorization-relevant input is embedded or referenced by
/// digest; nothing in the proof points at mutable external state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JustificationProof {
    pub proof_id: String,
    pub mutation: Intent,
    pub snapshot: ContextSnapshot,
    pub policy_basis: PolicyBasis,
    pub risk: RiskAssessment,
    pub boundary: Boundary,
    pub constructed_at: LogicalTime,
    /// Hash over the canonical form of `(M, S, Π, R, B)`.
    pub proof_hash: Digest256,
}

/// Borrowed view of the hashed fields, so the hash never silently covers
/// more or less than the five-field body.
#[derive(Serialize)]
struct ProofBody<'a> {
    mutation: &'a Intent,
    snapshot: &'a ContextSnapshot,
    policy_basis: &'a PolicyBasis,
    risk: &'a RiskAssessment,
    boundary: &'a Boundary,
}

impl JustificationProof {
    /// Compute the hash over `(M, S, Π, R, B)` in canonical form.
    pub fn body_hash(
        mutation: &Intent,
        snapshot: &ContextSnapshot,
        policy_basis: &PolicyBasis,
        risk: &RiskAssessment,
        boundary: &Boundary,
    ) -> Digest256 {
        canonical_digest(&ProofBody {
            mutation,
            snapshot,
            policy_basis,
            risk,
            boundary,
        })
        .expect("proof bodies are always canonical-serializable")
    }

    /// Recompute the proof hash from stored fields and compare. This is
    /// the re-evaluability anchor: a proof whose hash does not recompute
    /// is not the object that was attested.
    pub fn hash_verifies(&self) -> bool {
        Self::body_hash(
            &self.mutation,
            &self.snapshot,
            &self.policy_basis,
            &self.risk,
            &self.boundary,
        ) == self.proof_hash
    }

    /// Whether all five fields are populated: the mutation names an action
    /// and target, the snapshot has bindings and a verifying digest, the
    /// policy basis is pinned, and the boundary is present.
    pub fn fields_complete(&self) -> bool {
        !self.mutation.action.as_str().is_empty()
            && !self.mutation.targets.is_empty()
            && !self.snapshot.bindings.is_empty()
            && !self.policy_basis.bundle_version.is_empty()
            && !self.risk.required_profile.as_str().is_empty()
    }
}
