//! Piracy-tracing protocol for licensed data: watermarked versions handed out
//! through oblivious transfer, an on-ledger contract that pays informers for
//! reporting leaks, and an appeal path for falsely accused licensees.
//!
//! Protocol code is generic over a [`crypto::Group`] backend and the reward
//! code over a [`incentive::Money`] scalar; the aliases below fix the common
//! choices.

pub mod commitment;
pub mod contract;
pub mod crypto;
pub mod actors;
mod error;
pub mod incentive;
pub mod merkle;
pub mod ledger;
pub mod ot;
pub mod pir;
pub mod watermark;

pub use error::{Error, Result};

use num_rational::BigRational;

/// Reward schedule in exact rational arithmetic.
pub type ExactSchedule = incentive::RewardSchedule<BigRational>;
/// Reward schedule in `f64`, for plotting.
pub type FloatSchedule = incentive::RewardSchedule<f64>;
/// Additive group of order 101; discrete logs are trivial, for tests only.
pub type Z101 = crypto::TinyGroup<101>;
pub type SecureGroup = crypto::Ristretto;

/// Campaign over the secure backend.
pub type SecureCampaign = actors::Campaign<SecureGroup>;
/// Campaign over the tiny backend, where discrete logs are brute-forceable.
pub type TinyCampaign = actors::Campaign<Z101>;
