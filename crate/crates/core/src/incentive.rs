//! Sybil-proof reward schedules.
//!
//! A schedule is fixed by the bounty ceiling `c` and a non-negative sequence
//! `Δ_1..Δ_l` (zero beyond the guarantee length `l`) with `Σ 2^j·Δ_j ≤ c`.
//! From it follow
//!
//! * `ξ_1 = 0`, `ξ_{i+1} = ξ_i / 2 + Δ_i`,
//! * the reward of the `i`-th of `n` informers
//!   `B(i, n) = -ξ_i + Σ_{j=i+1..n} ξ_j + c·2^{-n+1}`,
//! * the split `B(i, n) = B1(i) + B2(n)` with `B1(i) = 2·Σ_{j≥i} Δ_j` payable
//!   on confirmation and `B2(n)` payable once `n` is final.
//!
//! Everything is generic over a [`Money`] scalar. Use an exact type such as
//! [`num_rational::BigRational`] when identities must hold bit-for-bit.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::invalid;
use crate::Result;

/// Scalar type usable as money in a [`RewardSchedule`].
pub trait Money: Num + Clone + PartialOrd + Debug + FromPrimitive + Send + Sync {}

impl<T: Num + Clone + PartialOrd + Debug + FromPrimitive + Send + Sync> Money for T {}

fn two<M: Money>() -> M {
    M::one() + M::one()
}

/// `x · 2^e`.
fn scale_pow2<M: Money>(x: M, e: i64) -> M {
    let mut out = x;
    if e >= 0 {
        for _ in 0..e {
            out = out * two();
        }
    } else {
        for _ in 0..(-e) {
            out = out / two();
        }
    }
    out
}

/// Reward of every informer under the equal-split model `c·2^{-n+1}`.
pub fn legacy_reward<M: Money>(c: &M, n: usize) -> M {
    scale_pow2(c.clone(), 1 - n as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardSchedule<M: Money> {
    c: M,
    deltas: Vec<M>,
    /// `ξ_1 ..= ξ_{l+1}`; beyond that `ξ` halves each step.
    xis: Vec<M>,
}

impl<M: Money> RewardSchedule<M> {
    /// Builds a schedule from `c` and `Δ_1..Δ_l`.
    pub fn new(c: M, deltas: Vec<M>) -> Result<Self> {
        if c <= M::zero() {
            return Err(invalid("bounty ceiling c must be positive"));
        }
        if deltas.iter().any(|d| *d < M::zero()) {
            return Err(invalid("every Δ_i must be non-negative"));
        }
        let weighted = deltas
            .iter()
            .enumerate()
            .fold(M::zero(), |acc, (j, d)| acc + scale_pow2(d.clone(), j as i64 + 1));
        if weighted > c {
            return Err(invalid("Σ 2^j·Δ_j exceeds the bounty ceiling"));
        }
        let mut xis = Vec::with_capacity(deltas.len() + 1);
        xis.push(M::zero());
        for d in &deltas {
            let prev = xis.last().cloned().expect("non-empty");
            xis.push(prev / two() + d.clone());
        }
        Ok(Self { c, deltas, xis })
    }

    /// `Δ_i = 2^{-i}·c/l` for `i ≤ l`, zero beyond.
    pub fn geometric(c: M, guarantee_len: usize) -> Result<Self> {
        if guarantee_len == 0 {
            return Err(invalid("guarantee length must be at least 1"));
        }
        let l = M::from_usize(guarantee_len).ok_or_else(|| invalid("guarantee length out of range"))?;
        let base = c.clone() / l;
        let deltas = (1..=guarantee_len).map(|i| scale_pow2(base.clone(), -(i as i64))).collect();
        Self::new(c, deltas)
    }

    /// The equal-split model: every `Δ_i = 0`.
    pub fn legacy(c: M) -> Result<Self> {
        Self::new(c, Vec::new())
    }

    pub fn c(&self) -> &M {
        &self.c
    }

    pub fn guarantee_len(&self) -> usize {
        self.deltas.len()
    }

    /// `Δ_j` for `j ≥ 1`.
    pub fn delta(&self, j: usize) -> M {
        assert!(j >= 1, "Δ is indexed from 1");
        self.deltas.get(j - 1).cloned().unwrap_or_else(M::zero)
    }

    /// `ξ_i` for `i ≥ 1`.
    pub fn xi(&self, i: usize) -> M {
        assert!(i >= 1, "ξ is indexed from 1");
        let last = self.xis.len();
        if i <= last {
            self.xis[i - 1].clone()
        } else {
            scale_pow2(self.xis[last - 1].clone(), -((i - last) as i64))
        }
    }

    /// `a_i = c·2^{-i+1} - ξ_i`.
    pub fn a(&self, i: usize) -> M {
        legacy_reward(&self.c, i) - self.xi(i)
    }

    /// `Σ_{j ≥ m} ξ_j`, with the geometric tail summed in closed form.
    fn xi_tail(&self, m: usize) -> M {
        assert!(m >= 1);
        let last = self.xis.len();
        let head = (m..last).fold(M::zero(), |acc, j| acc + self.xi(j));
        head + two::<M>() * self.xi(m.max(last))
    }

    /// `B(i, n)`.
    pub fn reward(&self, i: usize, n: usize) -> Result<M> {
        if i == 0 || i > n {
            return Err(invalid(format!("informer index {i} outside 1..={n}")));
        }
        let later = (i + 1..=n).fold(M::zero(), |acc, j| acc + self.xi(j));
        Ok(later - self.xi(i) + legacy_reward(&self.c, n))
    }

    /// `B1(i) = 2·Σ_{j≥i} Δ_j`, paid as soon as the `i`-th report is confirmed.
    pub fn immediate(&self, i: usize) -> M {
        assert!(i >= 1, "informer indices start at 1");
        let sum = (i..=self.deltas.len()).fold(M::zero(), |acc, j| acc + self.delta(j));
        two::<M>() * sum
    }

    /// `B2(n) = c·2^{-n+1} - Σ_{j>n} ξ_j`, paid to every informer once `n` is final.
    pub fn deferred(&self, n: usize) -> M {
        legacy_reward(&self.c, n) - self.xi_tail(n + 1)
    }

    /// Brute-force Sybil-proofness check over all nested subset pairs.
    ///
    /// Returns true iff for all `m ≤ k ≤ max_n`, `∅ ≠ S_m ⊆ {1..m}` and
    /// `S_k = S_m ∪ T` with `T ⊆ {m+1..k}` (the extra submissions are the
    /// later ones): `Σ_{i∈S_m} B(i, m) ≥ Σ_{i∈S_k} B(i, k)`. Exponential in `max_n`.
    pub fn check_sybil_proof(&self, max_n: usize) -> bool {
        assert!(max_n <= 16, "subset enumeration is exponential");
        let sums: Vec<Vec<M>> = (0..=max_n).map(|k| self.subset_sums(k)).collect();
        for k in 1..=max_n {
            for m in 1..=k {
                for s_m in 1usize..(1 << m) {
                    let lhs = &sums[m][s_m];
                    let free = ((1usize << k) - 1) & !((1usize << m) - 1);
                    let mut extra = free;
                    loop {
                        if sums[k][s_m | extra] > *lhs {
                            return false;
                        }
                        if extra == 0 {
                            break;
                        }
                        extra = (extra - 1) & free;
                    }
                }
            }
        }
        true
    }

    /// `sums[mask] = Σ_{bit i set} B(i+1, k)`.
    fn subset_sums(&self, k: usize) -> Vec<M> {
        let rewards: Vec<M> = (1..=k).map(|i| self.reward(i, k).expect("i ≤ k")).collect();
        let mut sums = vec![M::zero(); 1 << k];
        for mask in 1usize..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)].clone() + rewards[low].clone();
        }
        sums
    }

    /// Checks order-awareness, the timely-payout split, the guaranteed amount
    /// and the exponential-decay bound for every `i ≤ n ≤ max_n`.
    pub fn check_order_timely_guarantee(&self, max_n: usize) -> PropertyReport {
        assert!(max_n >= 2);
        let table = RewardTable::new(self, max_n);
        let mut report = PropertyReport {
            order_aware: true,
            strictly_ordered: true,
            timely_split_exact: true,
            guaranteed_amount: self.guarantee_len() >= 1,
            exponential_bound: true,
        };
        let a1 = self.a(1);
        let immediates: Vec<M> = (1..=max_n).map(|i| self.immediate(i)).collect();
        let deferreds: Vec<M> = (0..=max_n).map(|n| self.deferred(n)).collect();
        for (n, deferred) in deferreds.iter().enumerate().skip(1) {
            for i in 1..=n {
                let r = table.reward(i, n);
                if i < n {
                    let next = table.reward(i + 1, n);
                    report.order_aware &= r >= next;
                    report.strictly_ordered &= r > next;
                }
                report.timely_split_exact &= r == immediates[i - 1].clone() + deferred.clone();
                report.exponential_bound &= r <= scale_pow2(a1.clone(), 2 - i as i64);
            }
        }
        for i in 1..=self.guarantee_len().min(max_n) {
            report.guaranteed_amount &= immediates[i - 1] > M::zero();
        }
        report
    }
}

/// Prefix-summed rewards for every `i ≤ n ≤ max_n`.
struct RewardTable<M: Money> {
    xi: Vec<M>,
    prefix: Vec<M>,
    legacy: Vec<M>,
}

impl<M: Money> RewardTable<M> {
    fn new(s: &RewardSchedule<M>, max_n: usize) -> Self {
        let xi: Vec<M> = (1..=max_n).map(|i| s.xi(i)).collect();
        let mut prefix = vec![M::zero()];
        for x in &xi {
            let last = prefix.last().cloned().expect("non-empty");
            prefix.push(last + x.clone());
        }
        let legacy = (0..=max_n).map(|n| legacy_reward(s.c(), n)).collect();
        Self { xi, prefix, legacy }
    }

    fn reward(&self, i: usize, n: usize) -> M {
        self.prefix[n].clone() - self.prefix[i].clone() - self.xi[i - 1].clone() + self.legacy[n].clone()
    }
}

/// Outcome of [`RewardSchedule::check_order_timely_guarantee`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    /// `B(i, n) ≥ B(i+1, n)`.
    pub order_aware: bool,
    /// `B(i, n) > B(i+1, n)`.
    pub strictly_ordered: bool,
    /// `B(i, n) = B1(i) + B2(n)` exactly.
    pub timely_split_exact: bool,
    /// `B1(i) > 0` for every `i` up to the guarantee length (which must be ≥ 1).
    pub guaranteed_amount: bool,
    /// `B(i, n) ≤ a_1·2^{-i+2}`.
    pub exponential_bound: bool,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.order_aware && self.timely_split_exact && self.guaranteed_amount && self.exponential_bound
    }
}

/// Converts an integer amount of base units into an exact money value.
pub fn units(amount: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(amount))
}

/// Rounds an exact amount down to whole base units (negative clamps to 0).
pub fn floor_units(amount: &BigRational) -> u128 {
    if amount <= &BigRational::zero() {
        return 0;
    }
    amount.floor().to_integer().to_u128().unwrap_or(u128::MAX)
}

/// Lossy conversion for display.
pub fn to_f64(amount: &BigRational) -> f64 {
    amount.to_f64().unwrap_or(f64::NAN)
}
