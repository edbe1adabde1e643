//! Multi-period commit-and-reveal.
//!
//! The collection window is cut into `K` periods. A commitment recorded in
//! period `i` can only be opened in period `i + 1`, and every opening is
//! checked against the period tag `L[i] = H(H(X ‖ i))`, so an opening copied
//! from the ledger cannot be replayed in a later period pair.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::crypto::{hash_parts, Digest};
use crate::error::invalid;
use crate::Result;

/// 128-bit commitment nonce.
pub type Nonce = [u8; 16];

/// Encodes a 1-based period index as 4 big-endian bytes.
pub fn period_bytes(period: u32) -> [u8; 4] {
    period.to_be_bytes()
}

/// `rv = H(X ‖ i)`.
pub fn reveal_value(secret: &[u8], period: u32) -> Digest {
    hash_parts(&[secret, &period_bytes(period)])
}

/// Division of the collection window into `k_periods` equal periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodLayout {
    total_duration: Duration,
    k_periods: u32,
}

/// How long a report may wait for confirmation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfirmationBound {
    /// One period length: the figure usually quoted for the scheme.
    pub quoted: Duration,
    /// Commit at the start of a period, confirm at the end of the next.
    pub worst_case: Duration,
}

impl ConfirmationBound {
    pub fn quoted_hours(&self) -> f64 {
        self.quoted.as_secs_f64() / 3600.0
    }
}

impl PeriodLayout {
    pub fn new(total_duration: Duration, k_periods: u32) -> Result<Self> {
        if k_periods < 2 {
            return Err(invalid("need at least two periods"));
        }
        if total_duration.is_zero() {
            return Err(invalid("collection window must be non-empty"));
        }
        Ok(Self { total_duration, k_periods })
    }

    pub fn k_periods(&self) -> u32 {
        self.k_periods
    }

    pub fn total_duration(&self) -> Duration {
        self.total_duration
    }

    pub fn period_len(&self) -> Duration {
        self.total_duration / self.k_periods
    }

    /// 1-based period containing `elapsed`, or `None` past the window.
    pub fn period_at(&self, elapsed: Duration) -> Option<u32> {
        if elapsed >= self.total_duration {
            return None;
        }
        let idx = elapsed.as_nanos() / self.period_len().as_nanos().max(1);
        Some(idx as u32 + 1)
    }

    pub fn confirmation_bound(&self) -> ConfirmationBound {
        let quoted = self.period_len();
        ConfirmationBound { quoted, worst_case: quoted * 2 }
    }
}

/// `L[1..=K]` with `L[i] = H(H(X ‖ i))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagList(Vec<Digest>);

impl TagList {
    pub fn build(secret: &[u8], k_periods: u32) -> Result<Self> {
        if k_periods == 0 {
            return Err(invalid("tag list needs at least one period"));
        }
        Ok(Self((1..=k_periods).map(|i| hash_parts(&[reveal_value(secret, i).as_ref()])).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `L[i]` for 1-based `i`.
    pub fn get(&self, period: u32) -> Option<&Digest> {
        (period as usize).checked_sub(1).and_then(|i| self.0.get(i))
    }
}

/// A commitment together with the period it was recorded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub cm: Digest,
    pub period: u32,
}

/// An opening `(rv, nonce)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reveal {
    pub rv: Digest,
    pub nonce: Nonce,
}

/// `cm = H(H(X ‖ i) ‖ n)`, to be recorded in period `i`.
pub fn commit(secret: &[u8], period: u32, nonce: Nonce) -> Result<(Commitment, Reveal)> {
    if period == 0 {
        return Err(invalid("periods are numbered from 1"));
    }
    let rv = reveal_value(secret, period);
    let cm = hash_parts(&[rv.as_ref(), &nonce]);
    Ok((Commitment { cm, period }, Reveal { rv, nonce }))
}

/// Accepts iff `H(rv ‖ n) = cm`, `H(rv) = L[i]`, the commitment was recorded
/// in the claimed period `i`, and the opening arrives in period `i + 1`.
pub fn verify_reveal(cm: &Commitment, reveal: &Reveal, tags: &TagList, claimed_period: u32, reveal_period: u32) -> bool {
    let Some(tag) = tags.get(claimed_period) else {
        return false;
    };
    cm.period == claimed_period
        && reveal_period == claimed_period + 1
        && hash_parts(&[reveal.rv.as_ref(), &reveal.nonce]) == cm.cm
        && hash_parts(&[reveal.rv.as_ref()]) == *tag
}
