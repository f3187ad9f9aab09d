//! The evidence chain: an append-only, hash-linked lifecycle ledger.
//!
//! Each intent's lifecycle is four sealed events in causal order — proof
//! creation, attestation closure, identity issuance or refusal, and the
//! substrate outcome. Every entry chains to its predecessor through
//! `entry_hash = H(prev_hash ‖ canonical entry core)`, so proof,
//! approval, identity, and outcome cannot silently drift apart.
//!
//! The on-disk format is JSON lines: a header naming the hash function
//! and genesis value, then one sealed entry per line in canonical form.
//! The format is bit-exact and self-describing so third parties can
//! verify chains without this crate.
//!
//! The ledger interface exposes no mutation or deletion. A single
//! appender seals entries (chaining needs a total order); sealed
//! prefixes are safe for unlimited concurrent readers.

mod assemble;
mod replay;

pub use assemble::{assemble_record, completeness_check, CompletenessReport};
pub use replay::{replay, ArtifactStores, AuditQuestion, QuestionFinding, ReplayVerdict};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::canonical::{canonical_digest, canonical_string};
use crate::digest::{hash, hash_pair, Digest256, HASH_FUNCTION};
use crate::error::{Error, Result};
use crate::model::{
    AttestationSlot, Decision, ExecutionIdentity, Intent, IntentId, JustificationProof,
    MutationAttempt, Outcome, ProfileId,
};
use crate::time::LogicalTime;

/// Ledger format identifier; the genesis value is its hash.
pub const LEDGER_FORMAT: &str = "proofgate-evidence-chain-v1";

/// Genesis value: the first entry's `prev_hash`.
pub fn genesis() -> Digest256 {
    hash(LEDGER_FORMAT.as_bytes())
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// The four lifecycle event kinds, in causal order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ProofCreated,
    AttestationsClosed,
    IdentityIssuedOrRefused,
    OutcomeRecorded,
}

impl EventKind {
    pub const LIFECYCLE: [EventKind; 4] = [
        EventKind::ProofCreated,
        EventKind::AttestationsClosed,
        EventKind::IdentityIssuedOrRefused,
        EventKind::OutcomeRecorded,
    ];

    fn stage(self) -> u8 {
        match self {
            EventKind::ProofCreated => 0,
            EventKind::AttestationsClosed => 1,
            EventKind::IdentityIssuedOrRefused => 2,
            EventKind::OutcomeRecorded => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ProofCreated => "proof_created",
            EventKind::AttestationsClosed => "attestations_closed",
            EventKind::IdentityIssuedOrRefused => "identity_issued_or_refused",
            EventKind::OutcomeRecorded => "outcome_recorded",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Payload of a proof-creation event. A normalization failure is still
/// evidenced: the proof is absent and the error recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofCreatedPayload {
    pub intent: Intent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof: Option<JustificationProof>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization_error: Option<String>,
}

/// Payload of an attestation-closure event: every slot, verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttestationsClosedPayload {
    pub slots: Vec<AttestationSlot>,
    pub profile_id: ProfileId,
}

/// Payload of an identity event: the consensus decision, when it was
/// made, and either the issued identity or the refusal reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEventPayload {
    pub decision: Decision,
    pub decided_at: LogicalTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<ExecutionIdentity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal_reason: Option<String>,
}

/// Payload of an outcome event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<MutationAttempt>,
    pub outcome: Outcome,
}

// ---------------------------------------------------------------------------
// Entries
// ---------------------------------------------------------------------------

/// The fields covered by the entry hash.
#[derive(Serialize)]
struct EntryCore<'a> {
    seq: u64,
    kind: EventKind,
    intent_id: &'a IntentId,
    payload: &'a serde_json::Value,
}

/// One sealed ledger entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub seq: u64,
    pub kind: EventKind,
    pub intent_id: IntentId,
    pub payload: serde_json::Value,
    pub payload_digest: Digest256,
    pub prev_hash: Digest256,
    pub entry_hash: Digest256,
}

impl LedgerEntry {
    fn core_bytes(&self) -> Vec<u8> {
        crate::canonical::canonical_bytes(&EntryCore {
            seq: self.seq,
            kind: self.kind,
            intent_id: &self.intent_id,
            payload: &self.payload,
        })
        .expect("entry cores are always canonical-serializable")
    }

    /// Recompute this entry's hash from its stored fields.
    pub fn recompute_hash(&self) -> Digest256 {
        hash_pair(self.prev_hash.as_bytes(), &self.core_bytes())
    }

    pub fn typed_payload<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        Ok(serde_json::from_value(self.payload.clone())?)
    }
}

/// Ledger file header: first line of every ledger file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerHeader {
    pub format: String,
    pub hash_function: String,
    pub genesis: Digest256,
}

impl LedgerHeader {
    pub fn current() -> Self {
        LedgerHeader {
            format: LEDGER_FORMAT.to_string(),
            hash_function: HASH_FUNCTION.to_string(),
            genesis: genesis(),
        }
    }
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

/// An in-memory evidence chain with a single appender.
#[derive(Debug, Clone)]
pub struct Ledger {
    pub header: LedgerHeader,
    entries: Vec<LedgerEntry>,
    /// intent id → next expected lifecycle stage.
    stages: BTreeMap<IntentId, u8>,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::new()
    }
}

impl Ledger {
    pub fn new() -> Self {
        Ledger {
            header: LedgerHeader::current(),
            entries: Vec::new(),
            stages: BTreeMap::new(),
        }
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn intent_ids(&self) -> impl Iterator<Item = &IntentId> {
        self.stages.keys()
    }

    /// Seal one lifecycle event. Events for an intent must arrive in
    /// causal order: proof precedes attestation closure, closure precedes
    /// issuance, issuance precedes the outcome.
    pub fn append<T: Serialize>(
        &mut self,
        kind: EventKind,
        intent_id: &IntentId,
        payload: &T,
    ) -> Result<&LedgerEntry> {
        let expected = self.stages.get(intent_id).copied().unwrap_or(0);
        if kind.stage() != expected {
            return Err(Error::EvidenceOrdering {
                intent_id: intent_id.to_string(),
                detail: format!(
                    "got {kind}, expected stage {} next",
                    EventKind::LIFECYCLE
                        .get(expected as usize)
                        .map(|k| k.as_str())
                        .unwrap_or("none (lifecycle already complete)")
                ),
            });
        }

        let payload_value = serde_json::to_value(payload)?;
        let payload_digest = canonical_digest(&payload_value)?;
        let prev_hash = self
            .entries
            .last()
            .map(|e| e.entry_hash)
            .unwrap_or(self.header.genesis);
        let mut entry = LedgerEntry {
            seq: self.entries.len() as u64,
            kind,
            intent_id: intent_id.clone(),
            payload: payload_value,
            payload_digest,
            prev_hash,
            entry_hash: Digest256::ZERO,
        };
        entry.entry_hash = entry.recompute_hash();

        self.stages.insert(intent_id.clone(), expected + 1);
        self.entries.push(entry);
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Entries belonging to one intent, in lifecycle order.
    pub fn events_for(&self, intent_id: &IntentId) -> Vec<&LedgerEntry> {
        self.entries
            .iter()
            .filter(|e| &e.intent_id == intent_id)
            .collect()
    }

    /// Serialize to the bit-exact JSONL file form.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&canonical_string(&self.header)?);
        out.push('\n');
        for entry in &self.entries {
            out.push_str(&canonical_string(entry)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_jsonl()?.as_bytes())?;
        Ok(())
    }

    /// Parse a ledger file. Shape only — run [`verify_chain`] for
    /// integrity.
    pub fn read_file(path: &Path) -> Result<Ledger> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header_line = lines.next().ok_or(Error::LedgerFormat {
            line: 1,
            detail: "empty ledger file".into(),
        })??;
        let header: LedgerHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::LedgerFormat {
                line: 1,
                detail: format!("bad header: {e}"),
            })?;
        let mut entries = Vec::new();
        let mut stages: BTreeMap<IntentId, u8> = BTreeMap::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let entry: LedgerEntry =
                serde_json::from_str(&line).map_err(|e| Error::LedgerFormat {
                    line: idx + 2,
                    detail: format!("bad entry: {e}"),
                })?;
            let stage = stages.entry(entry.intent_id.clone()).or_insert(0);
            *stage = (*stage).max(entry.kind.stage() + 1);
            entries.push(entry);
        }
        Ok(Ledger {
            header,
            entries,
            stages,
        })
    }
}

// ---------------------------------------------------------------------------
// Integrity verification
// ---------------------------------------------------------------------------

/// Outcome of verifying a serialized chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub entries_checked: usize,
    /// First line at which the chain diverges, with the reason; `None`
    /// for a clean chain.
    pub first_divergence: Option<Divergence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// 1-based line number in the file.
    pub line: usize,
    pub reason: String,
}

impl IntegrityReport {
    pub fn clean(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Recompute every hash and link in a serialized ledger.
///
/// Operates on the raw file text so tampering is detected whether or not
/// the damaged line still parses.
pub fn verify_chain(text: &str) -> IntegrityReport {
    let mut checked = 0usize;
    let mut lines = text.lines().enumerate();

    let Some((_, header_line)) = lines.next() else {
        return IntegrityReport {
            entries_checked: 0,
            first_divergence: Some(Divergence {
                line: 1,
                reason: "empty ledger".into(),
            }),
        };
    };
    let header: LedgerHeader = match serde_json::from_str(header_line) {
        Ok(h) => h,
        Err(e) => {
            return IntegrityReport {
                entries_checked: 0,
                first_divergence: Some(Divergence {
                    line: 1,
                    reason: format!("header does not parse: {e}"),
                }),
            }
        }
    };
    if header.format != LEDGER_FORMAT
        || header.hash_function != HASH_FUNCTION
        || header.genesis != genesis()
    {
        return IntegrityReport {
            entries_checked: 0,
            first_divergence: Some(Divergence {
                line: 1,
                reason: "header names an unknown format, hash function, or genesis".into(),
            }),
        };
    }

    let mut prev = header.genesis;
    let mut expected_seq = 0u64;
    for (zero_idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = zero_idx + 1;
        let entry: LedgerEntry = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(e) => {
                return IntegrityReport {
                    entries_checked: checked,
                    first_divergence: Some(Divergence {
                        line: line_no,
                        reason: format!("entry does not parse: {e}"),
                    }),
                }
            }
        };
        let divergence = |reason: String| IntegrityReport {
            entries_checked: checked,
            first_divergence: Some(Divergence {
                line: line_no,
                reason,
            }),
        };
        if entry.seq != expected_seq {
            return divergence(format!(
                "sequence gap: expected {expected_seq}, found {}",
                entry.seq
            ));
        }
        if entry.prev_hash != prev {
            return divergence("previous-entry hash does not match the chain".into());
        }
        if canonical_digest(&entry.payload).ok() != Some(entry.payload_digest) {
            return divergence("payload digest does not recompute".into());
        }
        if entry.recompute_hash() != entry.entry_hash {
            return divergence("entry hash does not recompute".into());
        }
        prev = entry.entry_hash;
        expected_seq += 1;
        checked += 1;
    }

    IntegrityReport {
        entries_checked: checked,
        first_divergence: None,
    }
}
