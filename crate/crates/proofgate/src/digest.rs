//! 256-bit content digests.
//!
//! SHA-256 is the single digest function used for proof hashing, snapshot
//! digests, ledger chaining, and lineage references. The ledger header names
//! it so third parties can verify chains independently.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use std::fmt;

/// Name of the digest function, recorded in ledger headers.
pub const HASH_FUNCTION: &str = "sha256";

/// A 32-byte SHA-256 digest, serialized as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest256(pub [u8; 32]);

impl Digest256 {
    pub const ZERO: Digest256 = Digest256([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, crate::Error> {
        let bytes = hex::decode(s)
            .map_err(|e| crate::Error::KeyMaterial(format!("bad digest hex: {e}")))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| crate::Error::KeyMaterial("digest must be 32 bytes".into()))?;
        Ok(Digest256(arr))
    }
}

/// Hash an arbitrary byte sequence.
pub fn hash(bytes: &[u8]) -> Digest256 {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    Digest256(hasher.finalize().into())
}

/// Hash the concatenation of two byte sequences (used for chain linking).
pub fn hash_pair(first: &[u8], second: &[u8]) -> Digest256 {
    let mut hasher = Sha256::new();
    hasher.update(first);
    hasher.update(second);
    Digest256(hasher.finalize().into())
}

impl fmt::Debug for Digest256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Display for Digest256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest256 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest256 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest256::from_hex(&s).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_matches_published_vector() {
        // SHA-256("") from FIPS 180-4 test vectors.
        assert_eq!(
            hash(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn abc_matches_published_vector() {
        assert_eq!(
            hash(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn hash_is_deterministic() {
        assert_eq!(hash(b"same input"), hash(b"same input"));
    }

    #[test]
    fn hex_round_trips() {
        let d = hash(b"round trip");
        assert_eq!(Digest256::from_hex(&d.to_hex()).unwrap(), d);
    }

    #[test]
    fn pair_hash_differs_from_concatenation_order() {
        assert_ne!(hash_pair(b"a", b"b"), hash_pair(b"b", b"a"));
    }
}
