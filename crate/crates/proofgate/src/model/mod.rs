//! Domain types shared by every pipeline stage.
//!
//! Everything here is immutable after construction and canonically
//! serializable, so values can be hashed, chained into the ledger, and
//! shared freely across concurrent readers.

mod attestation;
mod boundary;
mod context;
mod decision;
mod governance;
mod identity;
mod ids;
mod intent;
mod outcome;
mod policy;
mod proof;
mod record;

pub use attestation::{
    Annotations, Attestation, AttestationDecision, AttestationOutcome, AttestationSlot,
    EvaluatorClass,
};
pub use boundary::{boundary_contains, Boundary, ValidityWindow};
pub use context::{ContextBinding, ContextSnapshot, ContextValue, FactDomain};
pub use decision::{Decision, DecisionBasis, Verdict};
pub use governance::{GovernanceMetadata, GovernanceProfiles};
pub use identity::{ExecutionIdentity, Lineage};
pub use ids::{ActionClass, EvaluatorId, IntentId, ProfileId, ResourceId};
pub use intent::{Intent, RawIntent};
pub use outcome::{MutationAttempt, ObligationObservation, Outcome, OutcomeStatus};
pub use policy::{
    BoundaryTemplate, PolicyBasis, PolicyBundle, PolicyRule, RiskAssessment, RiskClass, RuleMatch,
};
pub use proof::JustificationProof;
pub use record::EvidenceRecord;
