use rand::{CryptoRng, Rng, RngCore};

use super::{Digest, Group};
use crate::{Error, Result};

/// The additive group `Z_Q` with generator 1.
///
/// `Q` must be prime. Discrete logs are trivial here, which is the point:
/// tests use this backend to run exhaustive attacks and statistical checks
/// that would be infeasible over a real curve. Points and scalars are both
/// `u64` residues in `0..Q`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TinyGroup<const Q: u64>;

impl<const Q: u64> TinyGroup<Q> {
    pub const ORDER: u64 = Q;

    /// Recovers `k` from `k·G` by exhaustive search.
    pub fn brute_force_dlog(p: &u64) -> u64 {
        (0..Q)
            .find(|k| Self::base_mul(k) == *p)
            .expect("every element of Z_Q has a discrete log")
    }

    fn reduce(v: u128) -> u64 {
        (v % Q as u128) as u64
    }
}

impl<const Q: u64> Group for TinyGroup<Q> {
    type Scalar = u64;
    type Point = u64;

    const NAME: &'static str = "tiny";
    const POINT_LEN: usize = 8;
    const SCALAR_LEN: usize = 8;

    fn generator() -> u64 {
        1
    }

    fn identity() -> u64 {
        0
    }

    fn add(a: &u64, b: &u64) -> u64 {
        Self::reduce(*a as u128 + *b as u128)
    }

    fn sub(a: &u64, b: &u64) -> u64 {
        Self::reduce(*a as u128 + Q as u128 - (*b % Q) as u128)
    }

    fn mul(p: &u64, k: &u64) -> u64 {
        Self::reduce(*p as u128 * *k as u128)
    }

    fn scalar_from_u64(v: u64) -> u64 {
        v % Q
    }

    fn scalar_add(a: &u64, b: &u64) -> u64 {
        Self::add(a, b)
    }

    fn scalar_mul(a: &u64, b: &u64) -> u64 {
        Self::mul(a, b)
    }

    fn scalar_neg(a: &u64) -> u64 {
        Self::sub(&0, a)
    }

    fn scalar_from_digest(d: &Digest) -> u64 {
        let mut wide = [0u8; 16];
        wide.copy_from_slice(&d.0[..16]);
        Self::reduce(u128::from_be_bytes(wide))
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> u64 {
        rng.gen_range(0..Q)
    }

    fn random_point<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> u64 {
        rng.gen_range(0..Q)
    }

    fn encode_point(p: &u64) -> Vec<u8> {
        p.to_be_bytes().to_vec()
    }

    fn decode_point(bytes: &[u8]) -> Result<u64> {
        let arr: [u8; 8] = bytes
            .try_into()
            .map_err(|_| Error::Decode(format!("tiny point needs 8 bytes, got {}", bytes.len())))?;
        let v = u64::from_be_bytes(arr);
        if v >= Q {
            return Err(Error::Decode(format!("{v} is not reduced mod {Q}")));
        }
        Ok(v)
    }

    fn encode_scalar(k: &u64) -> Vec<u8> {
        Self::encode_point(k)
    }

    fn decode_scalar(bytes: &[u8]) -> Result<u64> {
        Self::decode_point(bytes)
    }
}
