//! Deterministic simulated ledger: a period clock, serialized transaction
//! application with rollback, coin balances and a gas meter.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crypto::{hash, hash_words, Digest, Group};
use crate::error::invalid;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

// Serialized as the `0x…` hex string so addresses can key JSON maps.
impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(s.trim_start_matches("0x")).map_err(serde::de::Error::custom)?;
        let bytes = <[u8; 20]>::try_from(raw.as_slice()).map_err(|_| serde::de::Error::custom("address needs 20 bytes"))?;
        Ok(Address(bytes))
    }
}

impl Address {
    pub fn from_label(label: &str) -> Self {
        Self::from_bytes(label.as_bytes())
    }

    pub fn from_public<G: Group>(pk: &G::Point) -> Self {
        Self::from_bytes(&G::encode_point(pk))
    }

    fn from_bytes(b: &[u8]) -> Self {
        Self(hash(b).0[..20].try_into().expect("20 bytes"))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", &self.to_hex()[..8])
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

/// Cost units per metered primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasSchedule {
    pub base_tx: u64,
    pub per_hash: u64,
    pub per_hash_word: u64,
    pub storage_write_new: u64,
    pub storage_write_update: u64,
    pub storage_read: u64,
    pub sig_verify: u64,
    pub group_op: u64,
    pub per_calldata_byte: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            base_tx: 21_000,
            per_hash: 36,
            per_hash_word: 6,
            storage_write_new: 20_000,
            storage_write_update: 5_000,
            storage_read: 800,
            sig_verify: 3_000,
            group_op: 6_000,
            per_calldata_byte: 16,
        }
    }
}

/// Primitive counts accumulated while a call executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GasMeter {
    pub hashes: u64,
    pub hash_words: u64,
    pub writes_new: u64,
    pub writes_update: u64,
    pub reads: u64,
    pub sig_verifies: u64,
    pub group_ops: u64,
}

impl GasMeter {
    /// One hash over length-prefixed parts of the given lengths.
    pub fn hash(&mut self, part_lens: &[usize]) {
        self.hashes += 1;
        self.hash_words += hash_words(part_lens);
    }

    /// `count` hashes of `words` words each.
    pub fn hashes(&mut self, count: u64, words: u64) {
        self.hashes += count;
        self.hash_words += count * words;
    }

    pub fn write_new(&mut self, words: u64) {
        self.writes_new += words;
    }

    pub fn write_update(&mut self, words: u64) {
        self.writes_update += words;
    }

    pub fn read(&mut self, words: u64) {
        self.reads += words;
    }

    pub fn sig_verify(&mut self, count: u64) {
        self.sig_verifies += count;
    }

    pub fn group_op(&mut self, count: u64) {
        self.group_ops += count;
    }

    /// Execution gas, excluding the base and calldata charges.
    pub fn gas(&self, s: &GasSchedule) -> u64 {
        self.hashes * s.per_hash
            + self.hash_words * s.per_hash_word
            + self.writes_new * s.storage_write_new
            + self.writes_update * s.storage_write_update
            + self.reads * s.storage_read
            + self.sig_verifies * s.sig_verify
            + self.group_ops * s.group_op
    }
}

/// A contract call as it appears on the wire.
pub trait Calldata {
    fn name(&self) -> &'static str;
    fn encode(&self) -> Vec<u8>;
}

/// Contract code run by the ledger. `execute` may mutate state freely; on
/// `Err` the ledger restores the pre-call state.
pub trait Contract: Clone {
    type Call: Calldata;
    type Event: Clone + fmt::Debug + PartialEq + Serialize;

    fn execute(&mut self, ctx: &mut CallContext<Self::Event>, call: &Self::Call) -> std::result::Result<(), String>;
}

/// What a contract sees of the current transaction.
#[derive(Debug)]
pub struct CallContext<E> {
    pub caller: Address,
    pub period: u32,
    /// Coins attached to the call, already credited to the contract.
    pub value: u128,
    pub meter: GasMeter,
    available: u128,
    payouts: Vec<(Address, u128)>,
    events: Vec<E>,
}

impl<E> CallContext<E> {
    pub fn emit(&mut self, event: E) {
        self.events.push(event);
    }

    /// Queues a payment from the contract's balance.
    pub fn send(&mut self, to: Address, amount: u128) -> std::result::Result<(), String> {
        if amount > self.available {
            return Err(format!("contract balance {} cannot cover {amount}", self.available));
        }
        self.available -= amount;
        self.payouts.push((to, amount));
        Ok(())
    }

    pub fn balance(&self) -> u128 {
        self.available
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TxStatus {
    Success,
    Reverted(String),
}

impl TxStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, TxStatus::Success)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Receipt<E> {
    pub tx_id: u64,
    pub caller: Address,
    pub period: u32,
    pub call: &'static str,
    pub gas_used: u64,
    pub calldata_bytes: usize,
    pub call_digest: Digest,
    pub meter: GasMeter,
    pub status: TxStatus,
    pub events: Vec<E>,
}

/// Flat receipt for CSV export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReceiptRow {
    pub tx: u64,
    pub caller: String,
    pub period: u32,
    pub call: &'static str,
    pub gas: u64,
    pub bytes: usize,
    pub status: &'static str,
    pub events: String,
}

impl<E: fmt::Debug> Receipt<E> {
    pub fn row(&self) -> ReceiptRow {
        ReceiptRow {
            tx: self.tx_id,
            caller: self.caller.to_string(),
            period: self.period,
            call: self.call,
            gas: self.gas_used,
            bytes: self.calldata_bytes,
            status: if self.status.is_success() { "SUCCESS" } else { "REVERTED" },
            events: self.events.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>().join("; "),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ledger<C: Contract> {
    period: u32,
    schedule: GasSchedule,
    balances: BTreeMap<Address, u128>,
    supply: u128,
    contract: Option<(Address, C)>,
    receipts: Vec<Receipt<C::Event>>,
}

impl<C: Contract> Ledger<C> {
    pub fn new(schedule: GasSchedule) -> Self {
        Self { period: 1, schedule, balances: BTreeMap::new(), supply: 0, contract: None, receipts: Vec::new() }
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn time(&self) -> u32 {
        self.period
    }

    pub fn advance_period(&mut self) -> u32 {
        self.period += 1;
        self.period
    }

    /// Mints `amount` to `to`. Only the genesis supply is ever created.
    pub fn genesis(&mut self, to: Address, amount: u128) {
        *self.balances.entry(to).or_default() += amount;
        self.supply += amount;
    }

    pub fn supply(&self) -> u128 {
        self.supply
    }

    pub fn balance(&self, who: &Address) -> u128 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<Address, u128> {
        &self.balances
    }

    pub fn transfer(&mut self, from: Address, to: Address, amount: u128) -> Result<()> {
        let have = self.balance(&from);
        if amount > have {
            return Err(invalid(format!("{from} holds {have}, cannot send {amount}")));
        }
        if from != to && amount > 0 {
            *self.balances.get_mut(&from).expect("balance checked") -= amount;
            *self.balances.entry(to).or_default() += amount;
        }
        Ok(())
    }

    pub fn deploy(&mut self, address: Address, contract: C) -> Result<()> {
        if self.contract.is_some() {
            return Err(Error::Protocol("a contract is already deployed".into()));
        }
        self.contract = Some((address, contract));
        Ok(())
    }

    pub fn contract_address(&self) -> Option<Address> {
        self.contract.as_ref().map(|(a, _)| *a)
    }

    pub fn contract(&self) -> Option<&C> {
        self.contract.as_ref().map(|(_, c)| c)
    }

    pub fn receipts(&self) -> &[Receipt<C::Event>] {
        &self.receipts
    }

    /// Applies one call. Rejections revert all state but still cost gas.
    pub fn submit(&mut self, caller: Address, value: u128, call: &C::Call) -> Result<&Receipt<C::Event>> {
        let (addr, contract) = self.contract.as_mut().ok_or_else(|| Error::Protocol("no contract deployed".into()))?;
        let addr = *addr;
        let data = call.encode();
        let mut ctx = CallContext {
            caller,
            period: self.period,
            value,
            meter: GasMeter::default(),
            available: self.balances.get(&addr).copied().unwrap_or(0) + value,
            payouts: Vec::new(),
            events: Vec::new(),
        };
        let have = self.balances.get(&caller).copied().unwrap_or(0);
        let outcome = if value > have {
            Err(format!("caller holds {have}, cannot attach {value}"))
        } else {
            let snapshot = contract.clone();
            let r = contract.execute(&mut ctx, call);
            if r.is_err() {
                *contract = snapshot;
            }
            r
        };
        let status = match outcome {
            Ok(()) => {
                self.transfer(caller, addr, value).expect("value checked");
                for (to, amount) in &ctx.payouts {
                    self.transfer(addr, *to, *amount).expect("payouts bounded by balance");
                }
                TxStatus::Success
            }
            Err(reason) => {
                ctx.events.clear();
                TxStatus::Reverted(reason)
            }
        };
        let gas_used = self.schedule.base_tx
            + data.len() as u64 * self.schedule.per_calldata_byte
            + ctx.meter.gas(&self.schedule);
        self.receipts.push(Receipt {
            tx_id: self.receipts.len() as u64,
            caller,
            period: self.period,
            call: call.name(),
            gas_used,
            calldata_bytes: data.len(),
            call_digest: hash(&data),
            meter: ctx.meter,
            status,
            events: ctx.events,
        });
        Ok(self.receipts.last().expect("just pushed"))
    }
}
