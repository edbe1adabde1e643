//! Binary Merkle trees, inclusion paths, the contract-side path cache and the
//! three-layer identity tree.
//!
//! Odd levels are padded by pairing the last node with itself, so a tree over
//! `n` leaves has depth `⌈log2 n⌉` and a single leaf is its own root.

mod cache;
mod id_tree;

pub use cache::{CacheOutcome, CachePolicy, PathCache};
pub use id_tree::{id_leaf, leaf_from_reveal, IdMap, IdTree, IdTreeDims, OwnerStore};

use serde::{Deserialize, Serialize};

use crate::crypto::{hash_parts, Digest};
use crate::error::invalid;
use crate::{Error, Result};

/// `H(left ‖ right)`.
pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    hash_parts(&[left.as_ref(), right.as_ref()])
}

/// `⌈log2 n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: u64) -> usize {
    assert!(n >= 1);
    (64 - (n - 1).leading_zeros()) as usize
}

/// Position of a node in heap order (root = 1) for a tree of `depth`.
/// `level` counts up from the leaves.
pub fn heap_position(depth: usize, level: usize, index: u64) -> u64 {
    (1u64 << (depth - level)) + index
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn build(leaves: Vec<Digest>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(invalid("a Merkle tree needs at least one leaf"));
        }
        let mut levels = vec![leaves];
        while levels.last().expect("non-empty").len() > 1 {
            let next = levels
                .last()
                .expect("non-empty")
                .chunks(2)
                .map(|pair| node_hash(&pair[0], pair.get(1).unwrap_or(&pair[0])))
                .collect();
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn leaf(&self, index: usize) -> Option<&Digest> {
        self.levels[0].get(index)
    }

    pub fn prove(&self, index: usize) -> Result<MerklePath> {
        if index >= self.leaf_count() {
            return Err(invalid(format!("leaf {index} out of range 0..{}", self.leaf_count())));
        }
        let mut siblings = Vec::with_capacity(self.depth());
        let mut idx = index;
        for level in &self.levels[..self.depth()] {
            let sib = idx ^ 1;
            siblings.push(*level.get(sib).unwrap_or(&level[idx]));
            idx >>= 1;
        }
        Ok(MerklePath { leaf_index: index as u64, siblings })
    }
}

/// Sibling digests from the leaf upward; direction bits are the bits of
/// `leaf_index` (bit `h` set means the running node is a right child at
/// level `h`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub leaf_index: u64,
    pub siblings: Vec<Digest>,
}

impl MerklePath {
    /// Folds the first `siblings.len()` levels starting from `leaf`,
    /// returning every computed ancestor (level 1 upward).
    pub fn ancestors(&self, leaf: &Digest) -> Vec<Digest> {
        let mut cur = *leaf;
        let mut idx = self.leaf_index;
        self.siblings
            .iter()
            .map(|sib| {
                cur = if idx & 1 == 0 { node_hash(&cur, sib) } else { node_hash(sib, &cur) };
                idx >>= 1;
                cur
            })
            .collect()
    }

    /// `8 + 1 + 32·len` bytes: index, sibling count, siblings.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + 32 * self.siblings.len());
        out.extend(self.leaf_index.to_be_bytes());
        out.push(self.siblings.len() as u8);
        for s in &self.siblings {
            out.extend(s.as_ref());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 {
            return Err(Error::Decode("path header truncated".into()));
        }
        let leaf_index = u64::from_be_bytes(bytes[..8].try_into().expect("8 bytes"));
        let count = bytes[8] as usize;
        let body = &bytes[9..];
        if body.len() != 32 * count {
            return Err(Error::Decode("path length mismatch".into()));
        }
        let siblings = body.chunks(32).map(|c| Digest::from_slice(c).expect("32 bytes")).collect();
        Ok(Self { leaf_index, siblings })
    }
}

/// Full-path verification against `root`.
pub fn verify(root: &Digest, leaf: &Digest, path: &MerklePath) -> bool {
    let depth = path.siblings.len();
    if depth < 64 && path.leaf_index >> depth != 0 {
        return false;
    }
    match path.ancestors(leaf).last() {
        Some(top) => top == root,
        None => leaf == root,
    }
}
