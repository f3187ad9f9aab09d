//! Bound context snapshots.
//!
//! A snapshot is the authorization-relevant world state captured at
//! decision time: one binding per fact, each carrying its source and
//! capture timestamp. Missing facts are recorded as explicit absence
//! markers rather than omitted, so downstream evaluators can detect
//! "missing dependency context" instead of silently approving.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::canonical::canonical_digest;
use crate::digest::Digest256;
use crate::time::LogicalTime;

/// The five context fact domains bound into every snapshot.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FactDomain {
    Dependencies,
    Traffic,
    Ownership,
    Protection,
    Incident,
}

impl FactDomain {
    pub const ALL: [FactDomain; 5] = [
        FactDomain::Dependencies,
        FactDomain::Traffic,
        FactDomain::Ownership,
        FactDomain::Protection,
        FactDomain::Incident,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactDomain::Dependencies => "dependencies",
            FactDomain::Traffic => "traffic",
            FactDomain::Ownership => "ownership",
            FactDomain::Protection => "protection",
            FactDomain::Incident => "incident",
        }
    }
}

impl fmt::Display for FactDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single captured fact value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ContextValue {
    Text(String),
    Flag(bool),
    List(Vec<String>),
    /// Explicit marker: the source for this domain was unavailable.
    Absent,
}

impl ContextValue {
    pub fn is_absent(&self) -> bool {
        matches!(self, ContextValue::Absent)
    }
}

/// One context fact with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBinding {
    pub domain: FactDomain,
    /// What the fact is about, typically a target resource id.
    pub key: String,
    pub value: ContextValue,
    pub source_id: String,
    pub captured_at: LogicalTime,
}

/// The bound form of context used for one authorization decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSnapshot {
    pub bindings: Vec<ContextBinding>,
    pub snapshot_digest: Digest256,
}

impl ContextSnapshot {
    /// Assemble a snapshot: bindings are sorted into canonical order and
    /// the digest is computed over that form.
    pub fn assemble(mut bindings: Vec<ContextBinding>) -> Self {
        bindings.sort_by(|a, b| {
            (a.domain, &a.key, &a.source_id).cmp(&(b.domain, &b.key, &b.source_id))
        });
        let snapshot_digest = Self::digest_of(&bindings);
        Self {
            bindings,
            snapshot_digest,
        }
    }

    pub fn digest_of(bindings: &[ContextBinding]) -> Digest256 {
        canonical_digest(&bindings).expect("context bindings are always canonical-serializable")
    }

    /// Recompute the digest from stored bindings and compare.
    pub fn digest_verifies(&self) -> bool {
        Self::digest_of(&self.bindings) == self.snapshot_digest
    }

    /// Snapshot freshness: the oldest binding capture time.
    pub fn freshness(&self) -> LogicalTime {
        self.bindings
            .iter()
            .map(|b| b.captured_at)
            .min()
            .unwrap_or(LogicalTime::ZERO)
    }

    /// All bindings for one fact domain.
    pub fn domain_bindings(&self, domain: FactDomain) -> impl Iterator<Item = &ContextBinding> {
        self.bindings.iter().filter(move |b| b.domain == domain)
    }

    /// Whether any binding in `domain` is an absence marker.
    pub fn domain_absent(&self, domain: FactDomain) -> bool {
        self.domain_bindings(domain).any(|b| b.value.is_absent())
    }
}
