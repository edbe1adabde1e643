//! 1-out-of-N oblivious transfer whose transcript doubles as appeal
//! evidence: the licensee's blinded choice `R = P_l − r·G` is dual-signed,
//! and later opening `(r, l)` proves which version it received.

use std::collections::HashSet;

use rand::{CryptoRng, RngCore};

use crate::crypto::{hash_parts, keystream, xor_into, DualSignature, Group, KeyPair, Signature};
use crate::error::invalid;
use crate::{Error, Result};

const PARAMS_TAG: &[u8] = b"argus/ot-params";
const EVIDENCE_TAG: &[u8] = b"argus/ot-evidence";
const CHECK_TAG: &[u8] = b"argus/ot-check";
const CHECKSUM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtPublicParams<G: Group> {
    pub points: Vec<G::Point>,
    pub a_s: G::Point,
    /// Owner's signature over `a_s` and the points.
    pub signature: Signature<G>,
}

impl<G: Group> OtPublicParams<G> {
    pub fn n(&self) -> u32 {
        self.points.len() as u32
    }

    /// `P_l`, 1-based.
    pub fn point(&self, l: u32) -> Option<&G::Point> {
        l.checked_sub(1).and_then(|i| self.points.get(i as usize))
    }

    fn signed_bytes(a_s: &G::Point, points: &[G::Point]) -> Vec<u8> {
        let mut out = PARAMS_TAG.to_vec();
        out.extend(G::encode_point(a_s));
        for p in points {
            out.extend(G::encode_point(p));
        }
        out
    }

    pub fn verify(&self, owner_pk: &G::Point) -> bool {
        crate::crypto::verify(owner_pk, &Self::signed_bytes(&self.a_s, &self.points), &self.signature)
    }

    /// Bytes a licensee downloads to run the protocol.
    pub fn encoded_len(&self) -> usize {
        4 + G::POINT_LEN * (self.points.len() + 1) + Signature::<G>::encoded_len()
    }
}

/// Owner's secret `s` and the precomputed `P'_i = s·P_i`.
#[derive(Debug, Clone)]
pub struct OwnerOtSecret<G: Group> {
    s: G::Scalar,
    primed: Vec<G::Point>,
    issued: HashSet<Vec<u8>>,
}

impl<G: Group> OwnerOtSecret<G> {
    pub fn s(&self) -> &G::Scalar {
        &self.s
    }

    pub fn primed(&self) -> &[G::Point] {
        &self.primed
    }

    /// Verifies the licensee's signature on `R` and co-signs it. Each
    /// licensee key gets evidence once; a second request is refused.
    pub fn cosign(
        &mut self,
        r_point: G::Point,
        licensee_sig: Signature<G>,
        licensee_pk: &G::Point,
        owner: &KeyPair<G>,
    ) -> Result<OtEvidence<G>> {
        let key = G::encode_point(licensee_pk);
        if self.issued.contains(&key) {
            return Err(Error::Duplicate);
        }
        let msg = evidence_message::<G>(&r_point);
        if !crate::crypto::verify(licensee_pk, &msg, &licensee_sig) {
            return Err(Error::Protocol("licensee signature on R does not verify".into()));
        }
        let outer = owner.sign(&crate::crypto::co_sign_message(&msg, &licensee_sig));
        self.issued.insert(key);
        Ok(OtEvidence { r_point, signature: DualSignature { inner: licensee_sig, outer } })
    }
}

pub fn initialize<G: Group, R: RngCore + CryptoRng + ?Sized>(
    n: u32,
    owner: &KeyPair<G>,
    rng: &mut R,
) -> Result<(OtPublicParams<G>, OwnerOtSecret<G>)> {
    if n < 2 {
        return Err(invalid("OT needs at least two versions"));
    }
    let s = G::random_scalar(rng);
    let points: Vec<G::Point> = (0..n).map(|_| G::random_point(rng)).collect();
    let primed = points.iter().map(|p| G::mul(p, &s)).collect();
    let a_s = G::base_mul(&s);
    let signature = owner.sign(&OtPublicParams::<G>::signed_bytes(&a_s, &points));
    Ok((OtPublicParams { points, a_s, signature }, OwnerOtSecret { s, primed, issued: HashSet::new() }))
}

/// Licensee's private choice: blinding scalar `r` and 1-based index `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtRecord<G: Group> {
    pub r: G::Scalar,
    pub l: u32,
}

impl<G: Group> OtRecord<G> {
    pub fn choose<R: RngCore + CryptoRng + ?Sized>(params: &OtPublicParams<G>, l: u32, rng: &mut R) -> Result<Self> {
        params.point(l).ok_or_else(|| invalid(format!("index {l} outside 1..={}", params.n())))?;
        Ok(Self { r: G::random_scalar(rng), l })
    }

    /// `R = P_l − r·G`.
    pub fn blinded(&self, params: &OtPublicParams<G>) -> Result<G::Point> {
        let p = params.point(self.l).ok_or_else(|| invalid(format!("index {} outside 1..={}", self.l, params.n())))?;
        Ok(G::sub(p, &G::base_mul(&self.r)))
    }

    /// Licensee half of evidence generation.
    pub fn sign(&self, params: &OtPublicParams<G>, licensee: &KeyPair<G>) -> Result<(G::Point, Signature<G>)> {
        let r_point = self.blinded(params)?;
        Ok((r_point, licensee.sign(&evidence_message::<G>(&r_point))))
    }
}

pub fn evidence_message<G: Group>(r_point: &G::Point) -> Vec<u8> {
    let mut out = EVIDENCE_TAG.to_vec();
    out.extend(G::encode_point(r_point));
    out
}

/// `R` with the licensee's signature and the owner's co-signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtEvidence<G: Group> {
    pub r_point: G::Point,
    pub signature: DualSignature<G>,
}

impl<G: Group> OtEvidence<G> {
    pub fn verify(&self, licensee_pk: &G::Point, owner_pk: &G::Point) -> bool {
        self.signature.verify(licensee_pk, owner_pk, &evidence_message::<G>(&self.r_point))
    }
}

/// Both halves of evidence generation in one call.
pub fn generate_evidence<G: Group>(
    params: &OtPublicParams<G>,
    secret: &mut OwnerOtSecret<G>,
    record: &OtRecord<G>,
    licensee: &KeyPair<G>,
    owner: &KeyPair<G>,
) -> Result<OtEvidence<G>> {
    let (r_point, sig) = record.sign(params, licensee)?;
    secret.cosign(r_point, sig, licensee.public(), owner)
}

pub(crate) fn frame(payload: &[u8], width: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + width + CHECKSUM_LEN);
    out.extend((payload.len() as u32).to_be_bytes());
    out.extend(payload);
    out.resize(4 + width, 0);
    out.extend(&hash_parts(&[CHECK_TAG, payload]).0[..CHECKSUM_LEN]);
    out
}

pub(crate) fn unframe(frame: &[u8]) -> Result<Vec<u8>> {
    if frame.len() < 4 + CHECKSUM_LEN {
        return Err(Error::Decode("ciphertext shorter than frame overhead".into()));
    }
    let width = frame.len() - 4 - CHECKSUM_LEN;
    let len = u32::from_be_bytes(frame[..4].try_into().expect("4 bytes")) as usize;
    if len > width {
        return Err(Error::DecryptionFailed);
    }
    let payload = &frame[4..4 + len];
    if frame[4 + len..4 + width].iter().any(|&b| b != 0)
        || frame[4 + width..] != hash_parts(&[CHECK_TAG, payload]).0[..CHECKSUM_LEN]
    {
        return Err(Error::DecryptionFailed);
    }
    Ok(payload.to_vec())
}

/// Bytes added to each payload by framing.
pub const FRAME_OVERHEAD: usize = 4 + CHECKSUM_LEN;

/// `E_i = H(Q_i, a_s, i) ⊕ frame(D_i)` with `Q_i = P'_i − s·R`.
pub fn transfer<G: Group>(
    params: &OtPublicParams<G>,
    secret: &OwnerOtSecret<G>,
    evidence: &OtEvidence<G>,
    licensee_pk: &G::Point,
    owner_pk: &G::Point,
    payloads: &[Vec<u8>],
) -> Result<Vec<Vec<u8>>> {
    if payloads.len() != params.points.len() {
        return Err(invalid(format!("{} payloads for {} versions", payloads.len(), params.n())));
    }
    if !evidence.verify(licensee_pk, owner_pk) {
        return Err(Error::Protocol("evidence is not dual-signed".into()));
    }
    let width = payloads.iter().map(Vec::len).max().unwrap_or(0);
    let r_prime = G::mul(&evidence.r_point, &secret.s);
    Ok(payloads
        .iter()
        .zip(&secret.primed)
        .enumerate()
        .map(|(i, (d, p_prime))| {
            let q = G::sub(p_prime, &r_prime);
            let mut e = frame(d, width);
            let ks = keystream::<G>(&q, &params.a_s, i as u64 + 1, e.len());
            xor_into(&mut e, &ks);
            e
        })
        .collect())
}

/// Decrypts slot `index` (1-based) under key point `q`.
pub fn decrypt_slot<G: Group>(ciphertexts: &[Vec<u8>], q: &G::Point, a_s: &G::Point, index: u32) -> Result<Vec<u8>> {
    let e = index
        .checked_sub(1)
        .and_then(|i| ciphertexts.get(i as usize))
        .ok_or_else(|| Error::Decode(format!("no ciphertext at index {index}")))?;
    let mut buf = e.clone();
    let ks = keystream::<G>(q, a_s, index as u64, buf.len());
    xor_into(&mut buf, &ks);
    unframe(&buf)
}

/// Licensee side: `D_l = E_l ⊕ H(r·a_s, a_s, l)`.
pub fn receive<G: Group>(ciphertexts: &[Vec<u8>], record: &OtRecord<G>, a_s: &G::Point) -> Result<Vec<u8>> {
    decrypt_slot::<G>(ciphertexts, &G::mul(a_s, &record.r), a_s, record.l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AppealVerdict {
    FalselyAccused,
    AppealFails,
}

/// What an accused licensee reveals: the opening `(r, l)` and the evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AppealSubmission<G: Group> {
    pub l: u32,
    pub r: G::Scalar,
    pub evidence: OtEvidence<G>,
}

impl<G: Group> AppealSubmission<G> {
    /// `l ‖ [r] ‖ [R] ‖ [sig_L] ‖ [sig_O]`, each bracketed field prefixed by
    /// its u16 length. Independent of N.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.l.to_be_bytes().to_vec();
        for field in [
            G::encode_scalar(&self.r),
            G::encode_point(&self.evidence.r_point),
            self.evidence.signature.inner.to_bytes(),
            self.evidence.signature.outer.to_bytes(),
        ] {
            out.extend((field.len() as u16).to_be_bytes());
            out.extend(field);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Decode("appeal submission truncated".into());
        let l = u32::from_be_bytes(bytes.get(..4).ok_or_else(short)?.try_into().expect("4 bytes"));
        let mut rest = &bytes[4..];
        let mut fields = Vec::with_capacity(4);
        for _ in 0..4 {
            let len = u16::from_be_bytes(rest.get(..2).ok_or_else(short)?.try_into().expect("2 bytes")) as usize;
            fields.push(rest.get(2..2 + len).ok_or_else(short)?);
            rest = &rest[2 + len..];
        }
        if !rest.is_empty() {
            return Err(Error::Decode("trailing bytes after appeal submission".into()));
        }
        Ok(Self {
            l,
            r: G::decode_scalar(fields[0])?,
            evidence: OtEvidence {
                r_point: G::decode_point(fields[1])?,
                signature: DualSignature {
                    inner: Signature::from_bytes(fields[2])?,
                    outer: Signature::from_bytes(fields[3])?,
                },
            },
        })
    }
}

/// `FalselyAccused` iff the evidence is dual-signed, `P_l − r·G = R`, and
/// `l ≠ accused`.
pub fn appeal_verdict<G: Group>(
    params: &OtPublicParams<G>,
    submission: &AppealSubmission<G>,
    licensee_pk: &G::Point,
    owner_pk: &G::Point,
    accused: u32,
) -> AppealVerdict {
    let opened = params
        .point(submission.l)
        .is_some_and(|p| G::sub(p, &G::base_mul(&submission.r)) == submission.evidence.r_point);
    if opened && submission.l != accused && submission.evidence.verify(licensee_pk, owner_pk) {
        AppealVerdict::FalselyAccused
    } else {
        AppealVerdict::AppealFails
    }
}
