//! Crate-wide error types.

use thiserror::Error;

/// Top-level error for pipeline, ledger, and fixture operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Canonical serialization failed (unsupported value kind).
    #[error("canonical serialization failed: {0}")]
    Canonical(#[from] serde_json::Error),

    /// A raw intent violated the intent schema during normalization.
    #[error("intent normalization failed: {0}")]
    Normalization(String),

    /// Identity issuance was refused.
    #[error("identity issuance refused: {0}")]
    IssuanceRefused(String),

    /// An issued scope escaped the proof boundary.
    #[error("scope escapes the proof boundary: {0}")]
    BoundaryViolation(String),

    /// An evidence event arrived out of lifecycle order.
    #[error("evidence ordering violation for intent {intent_id}: {detail}")]
    EvidenceOrdering { intent_id: String, detail: String },

    /// A lifecycle stage needed to assemble a record is missing.
    #[error("incomplete evidence for intent {intent_id}: missing {missing}")]
    IncompleteEvidence { intent_id: String, missing: String },

    /// A ledger file could not be parsed or failed validation.
    #[error("ledger format error at line {line}: {detail}")]
    LedgerFormat { line: usize, detail: String },

    /// A workload spec or run configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Signature material could not be decoded.
    #[error("bad key or signature material: {0}")]
    KeyMaterial(String),

    /// Filesystem I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
