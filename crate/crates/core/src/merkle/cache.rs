use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{heap_position, MerklePath};
use crate::crypto::Digest;
use crate::{Error, Result};

/// Which verified internal nodes the cache memorizes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CachePolicy {
    /// Every internal node below the root.
    #[default]
    All,
    /// Only nodes at these levels (counted up from the leaves).
    Levels(BTreeSet<usize>),
    /// Never cache; every path must be full.
    Disabled,
}

impl CachePolicy {
    fn keeps(&self, level: usize) -> bool {
        match self {
            CachePolicy::All => true,
            CachePolicy::Levels(set) => set.contains(&level),
            CachePolicy::Disabled => false,
        }
    }
}

/// Cost and result of one [`PathCache::verify`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CacheOutcome {
    pub accepted: bool,
    /// Node hashes computed while folding the path.
    pub hash_ops: usize,
    pub cache_reads: usize,
    pub cache_writes: usize,
}

/// Memo of internal nodes already verified against a fixed root, keyed by
/// heap position. Lets later provers submit only the part of their path
/// below the first cached ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCache {
    depth: usize,
    policy: CachePolicy,
    nodes: BTreeMap<u64, Digest>,
}

impl PathCache {
    pub fn new(depth: usize, policy: CachePolicy) -> Self {
        Self { depth, policy, nodes: BTreeMap::new() }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn contains(&self, level: usize, index: u64) -> bool {
        level < self.depth && self.nodes.contains_key(&heap_position(self.depth, level, index))
    }

    /// Lowest level above the leaf where the path for `leaf_index` meets a
    /// cached node, if any.
    pub fn truncation_level(&self, leaf_index: u64) -> Option<usize> {
        (1..self.depth).find(|&h| self.contains(h, leaf_index >> h))
    }

    /// Drops the siblings above the first cached ancestor.
    pub fn truncate(&self, path: &MerklePath) -> MerklePath {
        let keep = self.truncation_level(path.leaf_index).unwrap_or(path.siblings.len());
        MerklePath { leaf_index: path.leaf_index, siblings: path.siblings[..keep.min(path.siblings.len())].to_vec() }
    }

    /// Verifies a full or truncated path.
    ///
    /// A path of full depth is checked against `root`; a shorter one must end
    /// at a cached node and is checked against it. On success the newly
    /// verified nodes allowed by the policy are memorized.
    pub fn verify(&mut self, root: &Digest, leaf: &Digest, path: &MerklePath) -> Result<CacheOutcome> {
        let top = path.siblings.len();
        let mut out = CacheOutcome::default();
        if top > self.depth || (self.depth < 64 && path.leaf_index >> self.depth != 0) {
            return Ok(out);
        }
        let ancestors = path.ancestors(leaf);
        out.hash_ops = ancestors.len();
        let reached = ancestors.last().unwrap_or(leaf);
        out.accepted = if top == self.depth {
            reached == root
        } else {
            let pos = heap_position(self.depth, top, path.leaf_index >> top);
            out.cache_reads = 1;
            match self.nodes.get(&pos) {
                Some(cached) => cached == reached,
                None => return Err(Error::TruncationNotCached),
            }
        };
        if out.accepted {
            for (i, node) in ancestors.iter().enumerate() {
                let level = i + 1;
                if level >= self.depth || !self.policy.keeps(level) {
                    continue;
                }
                let pos = heap_position(self.depth, level, path.leaf_index >> level);
                if self.nodes.insert(pos, *node).is_none() {
                    out.cache_writes += 1;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::hash;
    use crate::merkle::{verify, MerkleTree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn tree(n: usize) -> (MerkleTree, Vec<Digest>) {
        let leaves: Vec<Digest> = (0..n).map(|i| hash(&(i as u64).to_le_bytes())).collect();
        (MerkleTree::build(leaves.clone()).unwrap(), leaves)
    }

    #[test]
    fn empty_cache_behaves_like_verify() {
        let (t, l) = tree(16);
        let mut cache = PathCache::new(t.depth(), CachePolicy::All);
        let p = t.prove(5).unwrap();
        let out = cache.verify(&t.root(), &l[5], &p).unwrap();
        assert!(out.accepted);
        assert_eq!(out.hash_ops, 4);
        assert_eq!(out.cache_writes, 3);
        assert_eq!(cache.len(), 3);
    }

    #[test]
    fn sibling_leaf_needs_one_fold() {
        let (t, l) = tree(16);
        let mut cache = PathCache::new(t.depth(), CachePolicy::All);
        cache.verify(&t.root(), &l[4], &t.prove(4).unwrap()).unwrap();
        let short = cache.truncate(&t.prove(5).unwrap());
        assert_eq!(short.siblings.len(), 1);
        let out = cache.verify(&t.root(), &l[5], &short).unwrap();
        assert!(out.accepted);
        assert_eq!(out.hash_ops, 1);
        assert_eq!(out.cache_reads, 1);
        // wrong leaf on a truncated path is rejected
        assert!(!cache.verify(&t.root(), &l[6], &short).unwrap().accepted);
    }

    #[test]
    fn truncation_to_uncached_node_errors() {
        let (t, l) = tree(16);
        let mut cache = PathCache::new(t.depth(), CachePolicy::All);
        let mut p = t.prove(9).unwrap();
        p.siblings.truncate(2);
        assert_eq!(cache.verify(&t.root(), &l[9], &p), Err(Error::TruncationNotCached));
    }

    #[test]
    fn level_policy_and_disabled() {
        let (t, l) = tree(32);
        let mut cache = PathCache::new(t.depth(), CachePolicy::Levels([3].into()));
        let out = cache.verify(&t.root(), &l[0], &t.prove(0).unwrap()).unwrap();
        assert_eq!(out.cache_writes, 1);
        assert_eq!(cache.truncation_level(7), Some(3));
        assert_eq!(cache.truncation_level(8), None);

        let mut off = PathCache::new(t.depth(), CachePolicy::Disabled);
        off.verify(&t.root(), &l[0], &t.prove(0).unwrap()).unwrap();
        assert!(off.is_empty());
    }

    #[test]
    fn cached_decisions_match_plain_verify() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for n in [2usize, 7, 16, 33, 64] {
            let (t, l) = tree(n);
            let mut cache = PathCache::new(t.depth(), CachePolicy::All);
            for _ in 0..200 {
                let i = rng.gen_range(0..n);
                let mut leaf = l[i];
                let mut short = cache.truncate(&t.prove(i).unwrap());
                let mut tampered = true;
                match rng.gen_range(0..4) {
                    0 => leaf.0[rng.gen_range(0..32)] ^= 1,
                    1 if !short.siblings.is_empty() => {
                        let k = rng.gen_range(0..short.siblings.len());
                        short.siblings[k].0[0] ^= 0x80;
                    }
                    _ => tampered = false,
                }
                let mut full = t.prove(i).unwrap();
                full.siblings[..short.siblings.len()].copy_from_slice(&short.siblings);
                let expected = verify(&t.root(), &leaf, &full);
                assert_eq!(expected, !tampered);
                let got = cache.verify(&t.root(), &leaf, &short).unwrap().accepted;
                assert_eq!(got, expected, "n={n} i={i}");
            }
        }
    }
}
