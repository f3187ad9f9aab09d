//! Execution boundaries and their containment order.
//!
//! A boundary is the four-component authority limit: permitted action
//! classes, authorized resources, a closed validity interval, and the
//! execution-time obligations that must hold. Boundaries are ordered by
//! containment: `inner ⊑ outer` means authority under `inner` can never
//! exceed authority under `outer`.
//!
//! Obligations order contravariantly: each obligation removes discretion,
//! so a *narrower* boundary carries a *superset* of the outer boundary's
//! obligations.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::ids::{ActionClass, ResourceId};
use crate::error::{Error, Result};
use crate::time::LogicalTime;

/// Closed time interval `[not_before, not_after]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityWindow {
    pub not_before: LogicalTime,
    pub not_after: LogicalTime,
}

impl ValidityWindow {
    pub fn new(not_before: LogicalTime, not_after: LogicalTime) -> Result<Self> {
        if not_before > not_after {
            return Err(Error::BoundaryViolation(format!(
                "validity window inverted: {not_before} > {not_after}"
            )));
        }
        Ok(Self {
            not_before,
            not_after,
        })
    }

    pub fn contains_time(&self, t: LogicalTime) -> bool {
        self.not_before <= t && t <= self.not_after
    }

    /// Interval containment: `self ⊆ outer`.
    pub fn within(&self, outer: &ValidityWindow) -> bool {
        outer.not_before <= self.not_before && self.not_after <= outer.not_after
    }
}

/// The maximum authority limit derived from a proof, and the shape of an
/// issued identity's scope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    /// Permitted action classes (μ). Empty means no issuance permitted.
    pub actions: BTreeSet<ActionClass>,
    /// Authorized resources (ρ). Empty means no issuance permitted.
    pub resources: BTreeSet<ResourceId>,
    /// Validity interval (τ).
    pub validity: ValidityWindow,
    /// Named execution-time obligation checks (Ω).
    pub obligations: BTreeSet<String>,
}

impl Boundary {
    /// The deny-by-default boundary: nothing issuable, anchored at `t`.
    pub fn empty_at(t: LogicalTime) -> Self {
        Self {
            actions: BTreeSet::new(),
            resources: BTreeSet::new(),
            validity: ValidityWindow {
                not_before: t,
                not_after: t,
            },
            obligations: BTreeSet::new(),
        }
    }

    /// Whether this boundary permits any issuance at all.
    pub fn issuable(&self) -> bool {
        !self.actions.is_empty() && !self.resources.is_empty()
    }
}

/// The containment partial order over boundaries: `inner` is no broader
/// than `outer`.
pub fn boundary_contains(inner: &Boundary, outer: &Boundary) -> bool {
    inner.actions.is_subset(&outer.actions)
        && inner.resources.is_subset(&outer.resources)
        && inner.validity.within(&outer.validity)
        && inner.obligations.is_superset(&outer.obligations)
}
