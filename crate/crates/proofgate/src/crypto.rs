//! Evaluator signing keys and the public key registry.
//!
//! Attestations are authenticated with Ed25519. Keys are generated
//! deterministically at evaluator registration from the run seed, and the
//! public halves are persisted in a key registry file so replay and
//! third-party verification work from stored artifacts alone.

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::digest::hash;
use crate::error::{Error, Result};

/// An Ed25519 signature, hex-encoded on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignatureHex(pub String);

/// A signing keypair held by one evaluator.
#[derive(Clone)]
pub struct EvaluatorKey {
    signing: SigningKey,
}

impl EvaluatorKey {
    /// Derive a keypair from the run seed and the evaluator id.
    ///
    /// Deterministic derivation keeps whole runs reproducible from
    /// `(seed, config)` while still giving every evaluator a distinct key.
    pub fn derive(run_seed: u64, evaluator_id: &str) -> Self {
        let mut material = Vec::with_capacity(16 + evaluator_id.len());
        material.extend_from_slice(&run_seed.to_be_bytes());
        material.extend_from_slice(b"evaluator-key:");
        material.extend_from_slice(evaluator_id.as_bytes());
        let seed = hash(&material);
        Self {
            signing: SigningKey::from_bytes(seed.as_bytes()),
        }
    }

    pub fn sign(&self, message: &[u8]) -> SignatureHex {
        SignatureHex(hex::encode(self.signing.sign(message).to_bytes()))
    }

    pub fn public_key_hex(&self) -> String {
        hex::encode(self.signing.verifying_key().to_bytes())
    }
}

/// Registry of evaluator public keys, persisted alongside each run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct KeyRegistry {
    /// evaluator id → hex-encoded Ed25519 public key.
    pub keys: BTreeMap<String, String>,
}

impl KeyRegistry {
    pub fn register(&mut self, evaluator_id: &str, public_key_hex: String) {
        self.keys.insert(evaluator_id.to_string(), public_key_hex);
    }

    /// Verify `signature` over `message` under the key registered for
    /// `evaluator_id`. Unknown evaluators and malformed material verify
    /// as false rather than erroring: a bad signature is a judgment the
    /// consensus rule must see, not a crash.
    pub fn verify(&self, evaluator_id: &str, message: &[u8], signature: &SignatureHex) -> bool {
        let Some(key_hex) = self.keys.get(evaluator_id) else {
            return false;
        };
        let Ok(key) = decode_verifying_key(key_hex) else {
            return false;
        };
        let Ok(sig_bytes) = hex::decode(&signature.0) else {
            return false;
        };
        let Ok(sig_arr) = <[u8; 64]>::try_from(sig_bytes.as_slice()) else {
            return false;
        };
        key.verify(message, &Signature::from_bytes(&sig_arr)).is_ok()
    }
}

fn decode_verifying_key(key_hex: &str) -> Result<VerifyingKey> {
    let bytes = hex::decode(key_hex).map_err(|e| Error::KeyMaterial(format!("bad key hex: {e}")))?;
    let arr: [u8; 32] = bytes
        .try_into()
        .map_err(|_| Error::KeyMaterial("public key must be 32 bytes".into()))?;
    VerifyingKey::from_bytes(&arr).map_err(|e| Error::KeyMaterial(format!("bad public key: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_keys_are_deterministic_and_distinct() {
        let a1 = EvaluatorKey::derive(7, "policy-1");
        let a2 = EvaluatorKey::derive(7, "policy-1");
        let b = EvaluatorKey::derive(7, "policy-2");
        assert_eq!(a1.public_key_hex(), a2.public_key_hex());
        assert_ne!(a1.public_key_hex(), b.public_key_hex());
    }

    #[test]
    fn registry_verifies_good_signatures_and_rejects_bad() {
        let key = EvaluatorKey::derive(1, "risk-1");
        let mut registry = KeyRegistry::default();
        registry.register("risk-1", key.public_key_hex());

        let sig = key.sign(b"message");
        assert!(registry.verify("risk-1", b"message", &sig));
        assert!(!registry.verify("risk-1", b"other message", &sig));
        assert!(!registry.verify("unknown", b"message", &sig));
    }

    #[test]
    fn flipped_signature_byte_fails_verification() {
        let key = EvaluatorKey::derive(2, "state-1");
        let mut registry = KeyRegistry::default();
        registry.register("state-1", key.public_key_hex());

        let sig = key.sign(b"attest");
        let mut raw = hex::decode(&sig.0).unwrap();
        raw[10] ^= 0x01;
        let tampered = SignatureHex(hex::encode(raw));
        assert!(!registry.verify("state-1", b"attest", &tampered));
    }
}
