//! Group arithmetic, hashing, keystreams and Schnorr signatures.
//!
//! Every protocol module is generic over a [`Group`] backend. Two backends
//! ship with the crate: [`TinyGroup`], an additive group of integers modulo a
//! small prime whose discrete log is trivial (for brute-force oracles), and
//! [`Ristretto`], the prime-order Ristretto255 group.

mod group;
mod hash;
mod ristretto;
mod schnorr;
mod tiny;

pub use group::{Group, GroupOp};
pub use hash::{expand, hash, hash_parts, hash_words, keystream, xor_into, Digest};
pub use ristretto::Ristretto;
pub use schnorr::{co_sign_message, verify, DualSignature, KeyPair, Signature};
pub use tiny::TinyGroup;
