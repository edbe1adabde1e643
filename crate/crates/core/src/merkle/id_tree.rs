use std::collections::HashMap;

use rayon::prelude::*;

use super::{ceil_log2, MerkleTree, MerklePath};
use crate::commitment::period_bytes;
use crate::crypto::{hash, hash_parts, Digest};
use crate::error::invalid;
use crate::watermark::WatermarkId;
use crate::{Error, Result};

/// Leaf for licensee `x`, version `y`, period `t` (all 1-based).
pub fn id_leaf(id: &WatermarkId, t: u32, x: u32, y: u32) -> Digest {
    leaf_from_reveal(&hash_parts(&[id.as_ref(), &period_bytes(t)]), x, y)
}

/// Leaf recomputed from a revealed `H(id ‖ t)`.
pub fn leaf_from_reveal(rv: &Digest, x: u32, y: u32) -> Digest {
    hash_parts(&[rv.as_ref(), &x.to_be_bytes(), &y.to_be_bytes()])
}

/// Shape of the three-layer tree: `licensees` subtrees of `versions`
/// subtrees of `periods` leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdTreeDims {
    pub licensees: u32,
    pub versions: u32,
    pub periods: u32,
}

impl IdTreeDims {
    pub fn new(licensees: u32, versions: u32, periods: u32) -> Result<Self> {
        if licensees == 0 || versions == 0 || periods == 0 {
            return Err(invalid("tree dimensions must be at least 1"));
        }
        Ok(Self { licensees, versions, periods })
    }

    /// Bits used by the (licensee, version, period) layers.
    pub fn layer_depths(&self) -> (usize, usize, usize) {
        (
            ceil_log2(self.licensees as u64),
            ceil_log2(self.versions as u64),
            ceil_log2(self.periods as u64),
        )
    }

    pub fn depth(&self) -> usize {
        let (m, n, k) = self.layer_depths();
        m + n + k
    }

    pub fn leaf_count(&self) -> u64 {
        self.licensees as u64 * self.versions as u64 * self.periods as u64
    }

    /// Global leaf index of `(x, y, t)`; this is the `leaf_index` of the
    /// composite path.
    pub fn leaf_index(&self, x: u32, y: u32, t: u32) -> Result<u64> {
        self.check(x, y)?;
        if t == 0 || t > self.periods {
            return Err(invalid(format!("period {t} out of range 1..={}", self.periods)));
        }
        let (_, dn, dk) = self.layer_depths();
        Ok(((((x - 1) as u64) << dn | (y - 1) as u64) << dk) | (t - 1) as u64)
    }

    fn check(&self, x: u32, y: u32) -> Result<()> {
        if x == 0 || x > self.licensees || y == 0 || y > self.versions {
            return Err(invalid(format!("position ({x},{y}) outside {}x{}", self.licensees, self.versions)));
        }
        Ok(())
    }
}

/// Public handle on the tree: dimensions plus root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdTree {
    pub dims: IdTreeDims,
    pub root: Digest,
}

const KEY_LEN: usize = 16;
type IdKey = [u8; KEY_LEN];

fn id_key(id_hash: &Digest) -> IdKey {
    id_hash.0[..KEY_LEN].try_into().expect("16 bytes")
}

/// `H(id) → (x, y)`, keyed on a 16-byte prefix of the hash.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    map: HashMap<IdKey, (u32, u32)>,
}

impl IdMap {
    pub fn get(&self, id_hash: &Digest) -> Option<(u32, u32)> {
        self.map.get(&id_key(id_hash)).copied()
    }

    pub fn lookup(&self, id: &WatermarkId) -> Option<(u32, u32)> {
        self.get(&hash(id.as_ref()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Everything the owner keeps after setup: one version-subtree root and one
/// id key per (licensee, version). Period leaves are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnerStore {
    dims: IdTreeDims,
    version_roots: Vec<Digest>,
    id_keys: Vec<IdKey>,
    licensee_roots: Vec<Digest>,
    top: MerkleTree,
    id_map: IdMap,
}

const STORE_MAGIC: &[u8; 4] = b"AOS1";

impl OwnerStore {
    /// Builds the tree over `ids[x-1][y-1]` with `periods` leaves per version.
    pub fn build(ids: &[Vec<WatermarkId>], periods: u32) -> Result<(IdTree, OwnerStore)> {
        let m = ids.len() as u32;
        let n = ids.first().map_or(0, |row| row.len()) as u32;
        if ids.iter().any(|row| row.len() as u32 != n) {
            return Err(invalid("id matrix rows differ in length"));
        }
        let dims = IdTreeDims::new(m, n, periods)?;
        let version_roots: Vec<Digest> = ids
            .par_iter()
            .enumerate()
            .flat_map_iter(|(xi, row)| {
                row.iter().enumerate().map(move |(yi, id)| {
                    version_tree(id, xi as u32 + 1, yi as u32 + 1, periods).root()
                })
            })
            .collect();
        let id_keys = ids.iter().flatten().map(|id| id_key(&hash(id.as_ref()))).collect();
        let store = Self::assemble(dims, version_roots, id_keys)?;
        Ok((IdTree { dims, root: store.root() }, store))
    }

    fn assemble(dims: IdTreeDims, version_roots: Vec<Digest>, id_keys: Vec<IdKey>) -> Result<Self> {
        let n = dims.versions as usize;
        let licensee_roots = version_roots
            .chunks(n)
            .map(|row| MerkleTree::build(row.to_vec()).map(|t| t.root()))
            .collect::<Result<Vec<_>>>()?;
        let top = MerkleTree::build(licensee_roots.clone())?;
        let mut map = HashMap::with_capacity(id_keys.len());
        for (i, key) in id_keys.iter().enumerate() {
            let pos = ((i / n) as u32 + 1, (i % n) as u32 + 1);
            if map.insert(*key, pos).is_some() {
                return Err(Error::Duplicate);
            }
        }
        Ok(Self { dims, version_roots, id_keys, licensee_roots, top, id_map: IdMap { map } })
    }

    pub fn dims(&self) -> IdTreeDims {
        self.dims
    }

    pub fn root(&self) -> Digest {
        self.top.root()
    }

    pub fn id_map(&self) -> &IdMap {
        &self.id_map
    }

    /// Number of digests persisted (one per version).
    pub fn digest_count(&self) -> usize {
        self.version_roots.len()
    }

    pub fn version_root(&self, x: u32, y: u32) -> Result<Digest> {
        self.dims.check(x, y)?;
        Ok(self.version_roots[self.offset(x, y)])
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (x as usize - 1) * self.dims.versions as usize + (y as usize - 1)
    }

    /// Full path from leaf `(x, y, t)` to the root. The period layer is
    /// rebuilt from `id`; the upper layers come from the store.
    pub fn query(&self, x: u32, y: u32, t: u32, id: &WatermarkId) -> Result<MerklePath> {
        match self.id_map.lookup(id) {
            Some(pos) if pos == (x, y) => {}
            _ => return Err(Error::NotFound(format!("no id registered at ({x},{y})"))),
        }
        let leaf_index = self.dims.leaf_index(x, y, t)?;
        let lower = version_tree(id, x, y, self.dims.periods);
        if lower.root() != self.version_roots[self.offset(x, y)] {
            return Err(Error::NotFound(format!("id does not match version ({x},{y})")));
        }
        let row_start = self.offset(x, 1);
        let middle = MerkleTree::build(self.version_roots[row_start..row_start + self.dims.versions as usize].to_vec())?;
        let mut siblings = lower.prove(t as usize - 1)?.siblings;
        siblings.extend(middle.prove(y as usize - 1)?.siblings);
        siblings.extend(self.top.prove(x as usize - 1)?.siblings);
        Ok(MerklePath { leaf_index, siblings })
    }

    /// `magic ‖ M ‖ N ‖ K`, then `root ‖ key` per version in row order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.version_roots.len() * (32 + KEY_LEN));
        out.extend(STORE_MAGIC);
        for v in [self.dims.licensees, self.dims.versions, self.dims.periods] {
            out.extend(v.to_be_bytes());
        }
        for (root, key) in self.version_roots.iter().zip(&self.id_keys) {
            out.extend(root.as_ref());
            out.extend(key);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != STORE_MAGIC {
            return Err(Error::Decode("not an owner store".into()));
        }
        let word = |i: usize| u32::from_be_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
        let dims = IdTreeDims::new(word(0), word(1), word(2)).map_err(|e| Error::Decode(e.to_string()))?;
        let body = &bytes[16..];
        let rec = 32 + KEY_LEN;
        let count = dims.licensees as usize * dims.versions as usize;
        if body.len() != count * rec {
            return Err(Error::Decode("owner store length mismatch".into()));
        }
        let (roots, keys) = body
            .chunks(rec)
            .map(|c| (Digest::from_slice(&c[..32]).expect("32 bytes"), <IdKey>::try_from(&c[32..]).expect("16 bytes")))
            .unzip();
        Self::assemble(dims, roots, keys)
    }
}

fn version_tree(id: &WatermarkId, x: u32, y: u32, periods: u32) -> MerkleTree {
    let leaves = (1..=periods).map(|t| id_leaf(id, t, x, y)).collect();
    MerkleTree::build(leaves).expect("periods >= 1")
}
