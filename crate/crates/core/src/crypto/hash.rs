use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::Group;

/// A SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        <[u8; 32]>::try_from(bytes).ok().map(Digest)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({}..)", &self.to_hex()[..12])
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Plain SHA-256 of `data`.
pub fn hash(data: &[u8]) -> Digest {
    Digest(Sha256::digest(data).into())
}

/// SHA-256 over the length-prefixed concatenation of `parts`.
///
/// Each part is preceded by its length as a 4-byte big-endian integer, so
/// `hash_parts(&[a, b])` never collides with `hash_parts(&[a', b'])` for a
/// different split of the same bytes.
pub fn hash_parts(parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u32).to_be_bytes());
        h.update(p);
    }
    Digest(h.finalize().into())
}

/// Number of 32-byte words hashed by [`hash_parts`] for the given part
/// lengths; used for gas metering.
pub fn hash_words(part_lens: &[usize]) -> u64 {
    let total: usize = part_lens.iter().map(|l| l + 4).sum();
    total.div_ceil(32) as u64
}

/// Counter-mode expansion of `seed` into `len` bytes.
pub fn expand(seed: &Digest, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 32);
    let mut counter: u64 = 0;
    while out.len() < len {
        let block = hash_parts(&[seed.as_ref(), &counter.to_be_bytes()]);
        out.extend_from_slice(&block.0);
        counter += 1;
    }
    out.truncate(len);
    out
}

/// The OT keystream `H(Q, a_s, index)` expanded to `len` bytes.
pub fn keystream<G: Group>(q_point: &G::Point, a_s: &G::Point, index: u64, len: usize) -> Vec<u8> {
    let seed = hash_parts(&[
        b"argus/ot-keystream",
        &G::encode_point(q_point),
        &G::encode_point(a_s),
        &index.to_be_bytes(),
    ]);
    expand(&seed, len)
}

/// XORs `stream` into `buf`. Lengths must match.
pub fn xor_into(buf: &mut [u8], stream: &[u8]) {
    assert_eq!(buf.len(), stream.len(), "keystream length mismatch");
    for (b, s) in buf.iter_mut().zip(stream) {
        *b ^= s;
    }
}
