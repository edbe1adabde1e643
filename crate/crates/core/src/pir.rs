//! Bulk delivery: every version is encrypted under its own key, the keys go
//! through OT, and the chosen ciphertext is fetched by two-server XOR PIR.

use std::collections::BTreeMap;
use std::fmt;

use rand::{CryptoRng, Rng, RngCore};
use serde::Serialize;

use crate::crypto::{expand, hash_parts, xor_into, Group};
use crate::error::invalid;
use crate::ot::{self, OtEvidence, OtPublicParams, OtRecord, OwnerOtSecret, FRAME_OVERHEAD};
use crate::{Error, Result};

pub const KEY_LEN: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SymKey(pub [u8; KEY_LEN]);

impl SymKey {
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; KEY_LEN];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    fn stream(&self, len: usize) -> Vec<u8> {
        expand(&hash_parts(&[b"argus/sym", &self.0]), len)
    }
}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymKey(..)")
    }
}

/// Frames `payload` to `width` bytes and XORs a keystream over it.
pub fn sym_encrypt(key: &SymKey, payload: &[u8], width: usize) -> Vec<u8> {
    let mut c = ot::frame(payload, width);
    let ks = key.stream(c.len());
    xor_into(&mut c, &ks);
    c
}

pub fn sym_decrypt(key: &SymKey, ciphertext: &[u8]) -> Result<Vec<u8>> {
    let mut buf = ciphertext.to_vec();
    let ks = key.stream(buf.len());
    xor_into(&mut buf, &ks);
    ot::unframe(&buf)
}

/// Equal-length ciphertexts `C_i`, one per version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherStore {
    ciphertexts: Vec<Vec<u8>>,
}

impl CipherStore {
    pub fn len(&self) -> usize {
        self.ciphertexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ciphertexts.is_empty()
    }

    pub fn item_len(&self) -> usize {
        self.ciphertexts.first().map_or(0, Vec::len)
    }

    pub fn get(&self, l: u32) -> Option<&[u8]> {
        l.checked_sub(1).and_then(|i| self.ciphertexts.get(i as usize)).map(Vec::as_slice)
    }

    /// XOR of the items selected by `query`.
    pub fn respond(&self, query: &PirQuery) -> Result<Vec<u8>> {
        if query.n as usize != self.len() {
            return Err(invalid(format!("query over {} items, store has {}", query.n, self.len())));
        }
        let mut acc = vec![0u8; self.item_len()];
        for (i, c) in self.ciphertexts.iter().enumerate() {
            if query.bit(i) {
                xor_into(&mut acc, c);
            }
        }
        Ok(acc)
    }
}

pub fn encrypt_all(payloads: &[Vec<u8>], keys: &[SymKey]) -> Result<CipherStore> {
    if payloads.len() != keys.len() {
        return Err(invalid(format!("{} payloads but {} keys", payloads.len(), keys.len())));
    }
    let width = payloads.iter().map(Vec::len).max().unwrap_or(0);
    Ok(CipherStore { ciphertexts: payloads.iter().zip(keys).map(|(d, k)| sym_encrypt(k, d, width)).collect() })
}

/// Bit-packed selection mask over `n` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PirQuery {
    pub n: u32,
    pub bits: Vec<u8>,
}

impl PirQuery {
    pub fn random<R: RngCore + ?Sized>(n: u32, rng: &mut R) -> Self {
        let mut bits = vec![0u8; (n as usize).div_ceil(8)];
        rng.fill_bytes(&mut bits);
        if !n.is_multiple_of(8) {
            *bits.last_mut().expect("n > 0") &= (1u8 << (n % 8)) - 1;
        }
        Self { n, bits }
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i / 8] ^= 1 << (i % 8);
    }

    /// Mask as an integer, for `n ≤ 64`.
    pub fn as_u64(&self) -> u64 {
        assert!(self.n <= 64);
        self.bits.iter().rev().fold(0, |acc, &b| acc << 8 | b as u64)
    }

    pub fn encoded_len(&self) -> usize {
        self.bits.len()
    }
}

/// Two queries differing exactly at `l` (1-based).
pub fn pir_queries<R: RngCore + ?Sized>(n: u32, l: u32, rng: &mut R) -> Result<(PirQuery, PirQuery)> {
    if l == 0 || l > n {
        return Err(invalid(format!("index {l} outside 1..={n}")));
    }
    let q1 = PirQuery::random(n, rng);
    let mut q2 = q1.clone();
    q2.flip(l as usize - 1);
    Ok((q1, q2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    OtParams,
    OtEvidence,
    OtKeys,
    PirQuery,
    PirResponse,
    DirectTransfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Owner,
    Licensee,
    Server1,
    Server2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BandwidthRow {
    pub phase: Phase,
    pub party: Party,
    pub direction: Direction,
    pub bytes: u64,
}

/// Byte counters per (phase, party, direction).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BandwidthLedger {
    counters: BTreeMap<(Phase, Party, Direction), u64>,
}

impl BandwidthLedger {
    /// Records a message of `bytes` from `from` to `to`.
    pub fn transfer(&mut self, phase: Phase, from: Party, to: Party, bytes: usize) {
        *self.counters.entry((phase, from, Direction::Sent)).or_default() += bytes as u64;
        *self.counters.entry((phase, to, Direction::Received)).or_default() += bytes as u64;
    }

    pub fn get(&self, phase: Phase, party: Party, direction: Direction) -> u64 {
        self.counters.get(&(phase, party, direction)).copied().unwrap_or(0)
    }

    pub fn total(&self, party: Party, direction: Direction) -> u64 {
        self.counters.iter().filter(|((_, p, d), _)| *p == party && *d == direction).map(|(_, b)| b).sum()
    }

    pub fn rows(&self) -> Vec<BandwidthRow> {
        self.counters
            .iter()
            .map(|(&(phase, party, direction), &bytes)| BandwidthRow { phase, party, direction, bytes })
            .collect()
    }

    pub fn reset(&mut self) {
        self.counters.clear();
    }
}

/// Fetches `C_l` from two replicas that must not collude.
pub fn pir_fetch<R: RngCore + ?Sized>(
    servers: &[&CipherStore],
    l: u32,
    rng: &mut R,
    ledger: &mut BandwidthLedger,
) -> Result<Vec<u8>> {
    let [s1, s2] = servers else {
        return Err(Error::Config(format!("XOR PIR needs exactly 2 servers, got {}", servers.len())));
    };
    let (q1, q2) = pir_queries(s1.len() as u32, l, rng)?;
    let mut out = Vec::new();
    for (server, party, q) in [(s1, Party::Server1, &q1), (s2, Party::Server2, &q2)] {
        ledger.transfer(Phase::PirQuery, Party::Licensee, party, q.encoded_len());
        let a = server.respond(q)?;
        ledger.transfer(Phase::PirResponse, party, Party::Licensee, a.len());
        if out.is_empty() {
            out = a;
        } else {
            xor_into(&mut out, &a);
        }
    }
    Ok(out)
}

/// Owner-side material prepared before any licensee shows up.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub keys: Vec<SymKey>,
    pub store: CipherStore,
}

impl Catalog {
    pub fn prepare<R: RngCore + CryptoRng + ?Sized>(payloads: &[Vec<u8>], rng: &mut R) -> Result<Self> {
        let keys: Vec<SymKey> = payloads.iter().map(|_| SymKey::random(rng)).collect();
        let store = encrypt_all(payloads, &keys)?;
        Ok(Self { keys, store })
    }
}

/// Result of [`hybrid_share`].
#[derive(Debug, Clone)]
pub struct SharedCopy {
    pub payload: Vec<u8>,
    pub bandwidth: BandwidthLedger,
    /// The OT ciphertexts `E_1..E_N` over the keys.
    pub transcript: Vec<Vec<u8>>,
}

/// Completes a share whose evidence is already co-signed: keys move by OT,
/// `C_l` by PIR from two replicas of the catalog. Bandwidth includes the
/// public-parameter download.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_share<G: Group, R: Rng + ?Sized>(
    params: &OtPublicParams<G>,
    secret: &OwnerOtSecret<G>,
    evidence: &OtEvidence<G>,
    licensee_pk: &G::Point,
    owner_pk: &G::Point,
    record: &OtRecord<G>,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<SharedCopy> {
    let mut ledger = BandwidthLedger::default();
    ledger.transfer(Phase::OtParams, Party::Owner, Party::Licensee, params.encoded_len());
    let evidence_len = G::POINT_LEN + crate::crypto::Signature::<G>::encoded_len();
    ledger.transfer(Phase::OtEvidence, Party::Licensee, Party::Owner, evidence_len);
    ledger.transfer(Phase::OtEvidence, Party::Owner, Party::Licensee, evidence_len + crate::crypto::Signature::<G>::encoded_len());

    let key_payloads: Vec<Vec<u8>> = catalog.keys.iter().map(|k| k.0.to_vec()).collect();
    let e = ot::transfer(params, secret, evidence, licensee_pk, owner_pk, &key_payloads)?;
    ledger.transfer(Phase::OtKeys, Party::Owner, Party::Licensee, e.iter().map(Vec::len).sum());
    let key_bytes = ot::receive(&e, record, &params.a_s)?;
    let key = SymKey(key_bytes.try_into().map_err(|_| Error::Protocol("OT slot does not hold a key".into()))?);

    let c = pir_fetch(&[&catalog.store, &catalog.store], record.l, rng, &mut ledger)?;
    Ok(SharedCopy { payload: sym_decrypt(&key, &c)?, bandwidth: ledger, transcript: e })
}

/// Bytes a licensee would receive if all `N` payloads went through OT directly.
pub fn direct_transfer_bytes(payloads: &[Vec<u8>]) -> u64 {
    let width = payloads.iter().map(Vec::len).max().unwrap_or(0);
    (payloads.len() * (width + FRAME_OVERHEAD)) as u64
}
