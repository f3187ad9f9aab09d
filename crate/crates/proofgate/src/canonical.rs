//! Canonical serialization.
//!
//! The wire and ledger format for every domain object is UTF-8 JSON with
//! lexicographically sorted object keys and no insignificant whitespace.
//! Equal values always serialize to identical bytes, which is what makes
//! proof hashes re-evaluable and evaluator agreement over "the same proof
//! hash" meaningful.
//!
//! Sorting falls out of routing every value through [`serde_json::Value`],
//! whose object representation is a `BTreeMap`. Domain types keep their
//! maps in `BTreeMap`s as well, so parse → serialize round-trips are
//! byte-identical.

use serde::{de::DeserializeOwned, Serialize};

use crate::digest::{hash, Digest256};
use crate::error::Result;

/// Serialize a value to canonical bytes (sorted keys, no whitespace).
pub fn canonical_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let tree = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&tree)?.into_bytes())
}

/// Canonical form as a string, for display and ledger lines.
pub fn canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&tree)?)
}

/// Parse a value back from canonical bytes.
pub fn from_canonical<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Digest of the canonical form of a value.
pub fn canonical_digest<T: Serialize>(value: &T) -> Result<Digest256> {
    Ok(hash(&canonical_bytes(value)?))
}
