//! Toy watermarking: ids are spliced into a reserved region at the head of
//! each segment, behind a magic prefix. No robustness is modelled.

use std::fmt;
use std::ops::Range;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::{hash_parts, Digest};
use crate::error::invalid;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ARGW";
pub const ID_LEN: usize = 16;
/// Bytes reserved at the start of every segment.
pub const MARK_REGION: usize = MAGIC.len() + ID_LEN;
pub const MAX_SEGMENTS: u32 = 20;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct WatermarkId(pub [u8; ID_LEN]);

impl WatermarkId {
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; ID_LEN];
        rng.fill_bytes(&mut b);
        Self(b)
    }

    pub fn from_digest(d: &Digest) -> Self {
        Self(d.0[..ID_LEN].try_into().expect("16 bytes"))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl AsRef<[u8]> for WatermarkId {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for WatermarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WatermarkId({})", self.to_hex())
    }
}

impl fmt::Display for WatermarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Payload split into `segments` near-equal chunks, each starting with a
/// mark region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asset {
    payload: Vec<u8>,
    segments: u32,
}

impl Asset {
    pub fn new(payload: Vec<u8>, segments: u32) -> Result<Self> {
        if segments == 0 || segments > MAX_SEGMENTS {
            return Err(invalid(format!("segment count {segments} outside 1..={MAX_SEGMENTS}")));
        }
        if payload.len() < segments as usize * MARK_REGION {
            return Err(invalid(format!(
                "payload of {} bytes too small for {segments} mark regions",
                payload.len()
            )));
        }
        Ok(Self { payload, segments })
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn segments(&self) -> u32 {
        self.segments
    }

    pub fn segment_range(&self, s: u32) -> Range<usize> {
        segment_range(self.payload.len(), self.segments, s)
    }
}

fn segment_range(len: usize, segments: u32, s: u32) -> Range<usize> {
    let (n, s) = (segments as usize, s as usize);
    (len * s / n)..(len * (s + 1) / n)
}

fn write_mark(segment: &mut [u8], id: &WatermarkId) {
    segment[..MAGIC.len()].copy_from_slice(MAGIC);
    segment[MAGIC.len()..MARK_REGION].copy_from_slice(&id.0);
}

/// Marks every segment with `id`.
pub fn embed(asset: &Asset, id: &WatermarkId) -> Vec<u8> {
    let mut out = asset.payload.clone();
    for s in 0..asset.segments {
        write_mark(&mut out[asset.segment_range(s)], id);
    }
    out
}

/// Per-segment marks of a copy cut into `segments` pieces.
pub fn extract_marks(copy: &[u8], segments: u32) -> Result<Vec<WatermarkId>> {
    if segments == 0 || copy.len() < segments as usize * MARK_REGION {
        return Err(Error::WatermarkNotDetected);
    }
    (0..segments)
        .map(|s| {
            let seg = &copy[segment_range(copy.len(), segments, s)];
            if &seg[..MAGIC.len()] != MAGIC {
                return Err(Error::WatermarkNotDetected);
            }
            Ok(WatermarkId(seg[MAGIC.len()..MARK_REGION].try_into().expect("16 bytes")))
        })
        .collect()
}

/// Identity carried by a set of segment marks: the mark itself when they all
/// agree, otherwise a hash of the sequence.
pub fn combine_marks(marks: &[WatermarkId]) -> WatermarkId {
    match marks.split_first() {
        Some((first, rest)) if rest.iter().all(|m| m == first) => *first,
        _ => {
            let parts: Vec<&[u8]> = marks.iter().map(|m| m.as_ref()).collect();
            WatermarkId::from_digest(&hash_parts(&parts))
        }
    }
}

pub fn detect(copy: &[u8], segments: u32) -> Result<WatermarkId> {
    extract_marks(copy, segments).map(|m| combine_marks(&m))
}

/// `2^L` versions built from two marked variants of each of `L` segments.
/// Version `j` takes variant 2 of segment `s` when bit `L-1-s` of `j` is set.
#[derive(Debug, Clone)]
pub struct VersionFamily {
    asset: Asset,
    variants: Vec<[WatermarkId; 2]>,
    marked: Vec<[Vec<u8>; 2]>,
    embed_calls: usize,
}

impl VersionFamily {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(asset: Asset, rng: &mut R) -> Self {
        let variants: Vec<[WatermarkId; 2]> = (0..asset.segments)
            .map(|_| [WatermarkId::random(rng), WatermarkId::random(rng)])
            .collect();
        let mut embed_calls = 0;
        let marked = (0..asset.segments)
            .map(|s| {
                let base = &asset.payload[asset.segment_range(s)];
                variants[s as usize].map(|w| {
                    embed_calls += 1;
                    let mut seg = base.to_vec();
                    write_mark(&mut seg, &w);
                    seg
                })
            })
            .collect();
        Self { asset, variants, marked, embed_calls }
    }

    pub fn segments(&self) -> u32 {
        self.asset.segments
    }

    pub fn len(&self) -> u64 {
        1u64 << self.asset.segments
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Segment-embed operations performed so far.
    pub fn embed_calls(&self) -> usize {
        self.embed_calls
    }

    fn bit(&self, j: u64, s: u32) -> usize {
        ((j >> (self.asset.segments - 1 - s)) & 1) as usize
    }

    pub fn version(&self, j: u64) -> Result<Vec<u8>> {
        self.check(j)?;
        let mut out = Vec::with_capacity(self.asset.payload.len());
        for s in 0..self.asset.segments {
            out.extend(&self.marked[s as usize][self.bit(j, s)]);
        }
        Ok(out)
    }

    /// Identity a detector recovers from version `j`.
    pub fn version_id(&self, j: u64) -> Result<WatermarkId> {
        self.check(j)?;
        let marks: Vec<WatermarkId> =
            (0..self.asset.segments).map(|s| self.variants[s as usize][self.bit(j, s)]).collect();
        Ok(combine_marks(&marks))
    }

    /// Recovers `j` from a copy by matching each segment's mark.
    pub fn detect_version(&self, copy: &[u8]) -> Result<u64> {
        let marks = extract_marks(copy, self.asset.segments)?;
        marks.iter().zip(&self.variants).try_fold(0u64, |j, (m, [w1, w2])| match m {
            m if m == w1 => Ok(j << 1),
            m if m == w2 => Ok(j << 1 | 1),
            _ => Err(Error::WatermarkNotDetected),
        })
    }

    fn check(&self, j: u64) -> Result<()> {
        if j >= self.len() {
            return Err(invalid(format!("version {j} outside family of {}", self.len())));
        }
        Ok(())
    }
}

/// Smallest segment count giving at least `n` versions.
pub fn segments_for(n: u64) -> Result<u32> {
    let l = crate::merkle::ceil_log2(n.max(1)).max(1) as u32;
    if l > MAX_SEGMENTS {
        return Err(Error::Config(format!("{n} versions need more than {MAX_SEGMENTS} segments")));
    }
    Ok(l)
}
