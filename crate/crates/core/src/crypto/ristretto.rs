use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::traits::Identity;
use curve25519_dalek::{constants::RISTRETTO_BASEPOINT_POINT, Scalar};
use rand::{CryptoRng, RngCore};

use super::{hash_parts, Digest, Group};
use crate::{Error, Result};

/// The Ristretto255 prime-order group (~128-bit security).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ristretto;

impl Group for Ristretto {
    type Scalar = Scalar;
    type Point = RistrettoPoint;

    const NAME: &'static str = "secure";
    const POINT_LEN: usize = 32;
    const SCALAR_LEN: usize = 32;

    fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn add(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn sub(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a - b
    }

    fn mul(p: &RistrettoPoint, k: &Scalar) -> RistrettoPoint {
        p * k
    }

    fn base_mul(k: &Scalar) -> RistrettoPoint {
        RistrettoPoint::mul_base(k)
    }

    fn scalar_from_u64(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn scalar_add(a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn scalar_mul(a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }

    fn scalar_neg(a: &Scalar) -> Scalar {
        -a
    }

    fn scalar_from_digest(d: &Digest) -> Scalar {
        let mut wide = [0u8; 64];
        wide[..32].copy_from_slice(&hash_parts(&[d.as_ref(), &[0]]).0);
        wide[32..].copy_from_slice(&hash_parts(&[d.as_ref(), &[1]]).0);
        Scalar::from_bytes_mod_order_wide(&wide)
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Scalar {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Scalar::from_bytes_mod_order_wide(&wide)
    }

    fn random_point<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> RistrettoPoint {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        RistrettoPoint::from_uniform_bytes(&wide)
    }

    fn encode_point(p: &RistrettoPoint) -> Vec<u8> {
        p.compress().to_bytes().to_vec()
    }

    fn decode_point(bytes: &[u8]) -> Result<RistrettoPoint> {
        CompressedRistretto::from_slice(bytes)
            .map_err(|_| Error::Decode(format!("ristretto point needs 32 bytes, got {}", bytes.len())))?
            .decompress()
            .ok_or_else(|| Error::Decode("not a valid ristretto encoding".into()))
    }

    fn encode_scalar(k: &Scalar) -> Vec<u8> {
        k.to_bytes().to_vec()
    }

    fn decode_scalar(bytes: &[u8]) -> Result<Scalar> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::Decode(format!("scalar needs 32 bytes, got {}", bytes.len())))?;
        Option::from(Scalar::from_canonical_bytes(arr))
            .ok_or_else(|| Error::Decode("non-canonical scalar".into()))
    }
}
