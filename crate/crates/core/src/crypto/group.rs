use std::fmt::Debug;

use rand::{CryptoRng, RngCore};

use super::Digest;
use crate::Result;

/// A prime-order cyclic group with a distinguished generator `G`.
///
/// Points are written additively. Backends are zero-sized markers; all
/// operations are associated functions so protocol types stay `Copy`-cheap.
pub trait Group: Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Copy + Clone + PartialEq + Eq + Debug + Send + Sync;
    type Point: Copy + Clone + PartialEq + Eq + Debug + Send + Sync;

    const NAME: &'static str;
    const POINT_LEN: usize;
    const SCALAR_LEN: usize;

    fn generator() -> Self::Point;
    fn identity() -> Self::Point;
    fn add(a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn sub(a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn mul(p: &Self::Point, k: &Self::Scalar) -> Self::Point;

    fn base_mul(k: &Self::Scalar) -> Self::Point {
        Self::mul(&Self::generator(), k)
    }

    fn scalar_from_u64(v: u64) -> Self::Scalar;
    fn scalar_add(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_neg(a: &Self::Scalar) -> Self::Scalar;

    /// Reduces a digest to a scalar (bias negligible for the backend).
    fn scalar_from_digest(d: &Digest) -> Self::Scalar;

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self::Scalar;
    fn random_point<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self::Point;

    fn encode_point(p: &Self::Point) -> Vec<u8>;
    fn decode_point(bytes: &[u8]) -> Result<Self::Point>;
    fn encode_scalar(k: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(bytes: &[u8]) -> Result<Self::Scalar>;
}

/// One group operation, for callers that meter arithmetic by count.
#[derive(Debug, Clone, Copy)]
pub enum GroupOp<G: Group> {
    BaseMul(G::Scalar),
    Mul(G::Point, G::Scalar),
    Add(G::Point, G::Point),
    Sub(G::Point, G::Point),
}

impl<G: Group> GroupOp<G> {
    pub fn eval(&self) -> G::Point {
        match self {
            GroupOp::BaseMul(k) => G::base_mul(k),
            GroupOp::Mul(p, k) => G::mul(p, k),
            GroupOp::Add(a, b) => G::add(a, b),
            GroupOp::Sub(a, b) => G::sub(a, b),
        }
    }
}
