use rand::{CryptoRng, RngCore};

use super::{hash, hash_parts, Digest, Group};
use crate::{Error, Result};

/// A Schnorr key pair over `G`.
#[derive(Debug, Clone, Copy)]
pub struct KeyPair<G: Group> {
    secret: G::Scalar,
    public: G::Point,
}

/// Schnorr signature in challenge/response form `(e, s)`.
///
/// The full 32-byte challenge is carried and compared on verification, so a
/// modified message is rejected even in the tiny backend where the scalar
/// field has only a few hundred elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature<G: Group> {
    pub challenge: Digest,
    pub response: G::Scalar,
}

impl<G: Group> KeyPair<G> {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self::from_secret(G::random_scalar(rng))
    }

    pub fn from_secret(secret: G::Scalar) -> Self {
        Self { secret, public: G::base_mul(&secret) }
    }

    pub fn public(&self) -> &G::Point {
        &self.public
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.secret
    }

    pub fn sign(&self, msg: &[u8]) -> Signature<G> {
        let msg_digest = hash(msg);
        let nonce_seed = hash_parts(&[b"argus/schnorr-nonce", &G::encode_scalar(&self.secret), msg_digest.as_ref()]);
        let k = G::scalar_from_digest(&nonce_seed);
        let commitment = G::base_mul(&k);
        let challenge = challenge::<G>(&commitment, &self.public, &msg_digest);
        let e = G::scalar_from_digest(&challenge);
        let response = G::scalar_add(&k, &G::scalar_mul(&e, &self.secret));
        Signature { challenge, response }
    }
}

fn challenge<G: Group>(commitment: &G::Point, public: &G::Point, msg_digest: &Digest) -> Digest {
    hash_parts(&[
        b"argus/schnorr",
        &G::encode_point(commitment),
        &G::encode_point(public),
        msg_digest.as_ref(),
    ])
}

/// Verifies `sig` on `msg` under `public`. Never panics; any mismatch is `false`.
pub fn verify<G: Group>(public: &G::Point, msg: &[u8], sig: &Signature<G>) -> bool {
    let e = G::scalar_from_digest(&sig.challenge);
    let commitment = G::sub(&G::base_mul(&sig.response), &G::mul(public, &e));
    challenge::<G>(&commitment, public, &hash(msg)) == sig.challenge
}

impl<G: Group> Signature<G> {
    pub fn encoded_len() -> usize {
        Digest::LEN + G::SCALAR_LEN
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.challenge.0.to_vec();
        out.extend(G::encode_scalar(&self.response));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::encoded_len() {
            return Err(Error::Decode(format!("signature needs {} bytes", Self::encoded_len())));
        }
        let challenge = Digest::from_slice(&bytes[..32]).expect("length checked");
        let response = G::decode_scalar(&bytes[32..])?;
        Ok(Self { challenge, response })
    }
}

/// The message the outer signer signs when co-signing: `msg ‖ inner`.
pub fn co_sign_message<G: Group>(msg: &[u8], inner: &Signature<G>) -> Vec<u8> {
    let mut out = msg.to_vec();
    out.extend(inner.to_bytes());
    out
}

/// An inner signature plus an outer signature over `(msg ‖ inner)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualSignature<G: Group> {
    pub inner: Signature<G>,
    pub outer: Signature<G>,
}

impl<G: Group> DualSignature<G> {
    pub fn verify(&self, inner_pk: &G::Point, outer_pk: &G::Point, msg: &[u8]) -> bool {
        verify(inner_pk, msg, &self.inner) && verify(outer_pk, &co_sign_message(msg, &self.inner), &self.outer)
    }
}
