//! Proof-gated authorization for governed infrastructure mutation.
//!
//! Authority here is a derived state, not a standing property of a caller.
//! A proposed mutation executes only after it has passed through the ordered
//! authorization path:
//!
//! 1. **Justification proof** — the intent is normalized, bound to a context
//!    snapshot, evaluated against a versioned policy bundle, and assembled
//!    into a stable, hash-anchored proof object ([`engine`]).
//! 2. **Evaluator swarm** — independent evaluators of heterogeneous classes
//!    attest over the same serialized proof ([`swarm`]).
//! 3. **Consensus** — a quorum rule with veto, rejection-threshold,
//!    diversity, freshness, and signature checks converts attestations into
//!    approve / reject / escalate ([`consensus`]).
//! 4. **Execution identity** — approval derives an ephemeral identity whose
//!    scope is contained in the proof boundary; every mutation attempt is
//!    re-validated immediately before the substrate call ([`broker`]).
//! 5. **Evidence chain** — all four lifecycle stages are sealed into an
//!    append-only, hash-linked ledger that supports integrity verification
//!    and full replay of the authorization basis ([`ledger`]).
//!
//! The [`harness`] module drives the pipeline over a deterministic synthetic
//! workload, runs the standing-credential (B1) and policy-precheck (B2)
//! baselines, and supports component ablations, reproducing the containment
//! and auditability metrics from the design evaluation at desk scale.

pub mod broker;
pub mod canonical;
pub mod consensus;
pub mod crypto;
pub mod digest;
pub mod engine;
pub mod error;
pub mod harness;
pub mod ledger;
pub mod model;
pub mod swarm;
pub mod time;

pub use digest::{hash, Digest256};
pub use error::Error;
pub use time::{LogicalClock, LogicalTime};
