//! The campaign contract: stores the identity-tree root and the OT points,
//! collects period-stamped report commitments, verifies reveals against the
//! tree, pays bounties, and settles appeals.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::crypto::{hash_parts, Digest, Group, Signature};
use crate::incentive::floor_units;
use crate::ledger::{Address, CallContext, Calldata, Contract};
use crate::merkle::{self, leaf_from_reveal, CachePolicy, IdTreeDims, MerklePath, PathCache};
use crate::ot::{evidence_message, OtEvidence};
use crate::ExactSchedule;

type Outcome = std::result::Result<(), String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Normal,
    Accused,
    Guilty,
    Exonerated,
}

impl Status {
    /// Whether the contract may move a licensee from `self` to `next`.
    pub fn can_become(self, next: Status) -> bool {
        matches!(
            (self, next),
            (Status::Normal, Status::Accused) | (Status::Accused, Status::Guilty) | (Status::Accused, Status::Exonerated)
        )
    }
}

/// Where the OT points live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PListMode {
    /// Every `P_j` is written to contract storage.
    #[default]
    OnChain,
    /// Only a Merkle root over `H(P_j)` is stored; appeals carry an opening.
    Committed,
}

/// Which verified tree nodes the contract memorizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheMode {
    Off,
    /// Roots of version and licensee subtrees only.
    #[default]
    Layers,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractConfig {
    pub owner: Address,
    pub licensees: u32,
    pub periods: u32,
    /// Periods an accused licensee has to appeal.
    pub timeout: u32,
    /// Bounty pool per licensee, in base units.
    pub bounty: u128,
    pub guarantee_len: usize,
    pub cache: CacheMode,
    pub plist_mode: PListMode,
    /// Enables the transcript-replay appeal used as an O(N) baseline.
    pub baseline_appeal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BountyKind {
    Immediate,
    Deferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    LicenseeRegistered { x: u32 },
    PointsStored { total: u32 },
    RootStored,
    Deposited { x: u32, amount: u128 },
    Committed { period: u32, x: u32, y: u32 },
    Reported { x: u32, y: u32, informer: Address, number: u32 },
    Accused { x: u32, version: u32, report_time: u32 },
    BountyPaid { x: u32, to: Address, amount: u128, kind: BountyKind },
    Exonerated { x: u32 },
    Guilty { x: u32 },
}

/// Opening of `P_l` against a committed point list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointOpening<G: Group> {
    pub point: G::Point,
    pub path: MerklePath,
}

/// Leaf committing `P_j` in [`PListMode::Committed`].
pub fn point_leaf<G: Group>(p: &G::Point) -> Digest {
    hash_parts(&[b"argus/p", &G::encode_point(p)])
}

/// `cm_1 = H(rv_1 ‖ informer)`.
pub fn report_commitment(rv1: &Digest, informer: &Address) -> Digest {
    hash_parts(&[rv1.as_ref(), &informer.0])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Call<G: Group> {
    RegisterLicensee { x: u32, pk: G::Point },
    StorePoints(Vec<G::Point>),
    StorePointRoot { root: Digest, count: u32 },
    StoreRoot { root: Digest, dims: IdTreeDims },
    StoreCommitment { cm: Digest, x: u32, y: u32 },
    Deposit { x: u32 },
    VerifyReport { rv1: Digest, path: MerklePath, informer: Address },
    VerifyAppeal { x: u32, l: u32, r: G::Scalar, evidence: OtEvidence<G>, opening: Option<PointOpening<G>> },
    BaselineAppeal {
        x: u32,
        l: u32,
        r: G::Scalar,
        evidence: OtEvidence<G>,
        transcript: Vec<Vec<u8>>,
        transcript_sig: Signature<G>,
    },
    AllocateBounty { informer: Address, x: u32 },
    SetGuilty { x: u32 },
}

/// Message the owner signs over an OT transcript for the baseline appeal.
pub fn transcript_message<G: Group>(r_point: &G::Point, transcript: &[Vec<u8>]) -> Vec<u8> {
    let mut parts: Vec<&[u8]> = vec![b"argus/transcript"];
    let enc = G::encode_point(r_point);
    parts.push(&enc);
    parts.extend(transcript.iter().map(Vec::as_slice));
    hash_parts(&parts).0.to_vec()
}

fn put_field(out: &mut Vec<u8>, field: &[u8]) {
    out.extend((field.len() as u32).to_be_bytes());
    out.extend(field);
}

fn encode_evidence<G: Group>(out: &mut Vec<u8>, ev: &OtEvidence<G>) {
    put_field(out, &G::encode_point(&ev.r_point));
    put_field(out, &ev.signature.inner.to_bytes());
    put_field(out, &ev.signature.outer.to_bytes());
}

impl<G: Group> Calldata for Call<G> {
    fn name(&self) -> &'static str {
        match self {
            Call::RegisterLicensee { .. } => "register_licensee",
            Call::StorePoints(_) => "store_p",
            Call::StorePointRoot { .. } => "store_p_root",
            Call::StoreRoot { .. } => "store_rt",
            Call::StoreCommitment { .. } => "store_cm",
            Call::Deposit { .. } => "deposit",
            Call::VerifyReport { .. } => "verify_report",
            Call::VerifyAppeal { .. } => "verify_appeal",
            Call::BaselineAppeal { .. } => "baseline_appeal",
            Call::AllocateBounty { .. } => "allocate_bounty",
            Call::SetGuilty { .. } => "set_guilty",
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = vec![];
        match self {
            Call::RegisterLicensee { x, pk } => {
                out.push(0);
                out.extend(x.to_be_bytes());
                out.extend(G::encode_point(pk));
            }
            Call::StorePoints(points) => {
                out.push(1);
                for p in points {
                    out.extend(G::encode_point(p));
                }
            }
            Call::StorePointRoot { root, count } => {
                out.push(2);
                out.extend(root.as_ref());
                out.extend(count.to_be_bytes());
            }
            Call::StoreRoot { root, dims } => {
                out.push(3);
                out.extend(root.as_ref());
                for v in [dims.licensees, dims.versions, dims.periods] {
                    out.extend(v.to_be_bytes());
                }
            }
            Call::StoreCommitment { cm, x, y } => {
                out.push(4);
                out.extend(cm.as_ref());
                out.extend(x.to_be_bytes());
                out.extend(y.to_be_bytes());
            }
            Call::Deposit { x } => {
                out.push(5);
                out.extend(x.to_be_bytes());
            }
            Call::VerifyReport { rv1, path, informer } => {
                out.push(6);
                out.extend(rv1.as_ref());
                out.extend(informer.0);
                out.extend(path.to_bytes());
            }
            Call::VerifyAppeal { x, l, r, evidence, opening } => {
                out.push(7);
                out.extend(x.to_be_bytes());
                out.extend(l.to_be_bytes());
                put_field(&mut out, &G::encode_scalar(r));
                encode_evidence(&mut out, evidence);
                if let Some(o) = opening {
                    put_field(&mut out, &G::encode_point(&o.point));
                    put_field(&mut out, &o.path.to_bytes());
                }
            }
            Call::BaselineAppeal { x, l, r, evidence, transcript, transcript_sig } => {
                out.push(8);
                out.extend(x.to_be_bytes());
                out.extend(l.to_be_bytes());
                put_field(&mut out, &G::encode_scalar(r));
                encode_evidence(&mut out, evidence);
                put_field(&mut out, &transcript_sig.to_bytes());
                for e in transcript {
                    put_field(&mut out, e);
                }
            }
            Call::AllocateBounty { informer, x } => {
                out.push(9);
                out.extend(informer.0);
                out.extend(x.to_be_bytes());
            }
            Call::SetGuilty { x } => {
                out.push(10);
                out.extend(x.to_be_bytes());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CmEntry {
    cm: Digest,
    x: u32,
    y: u32,
    consumed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LicenseeRecord {
    pub status: Status,
    pub version: Option<u32>,
    pub report_time: Option<u32>,
    pub report_number: u32,
    pub pool: u128,
    pub paid: u128,
    pub informers: BTreeSet<Address>,
}

impl Default for LicenseeRecord {
    fn default() -> Self {
        Self {
            status: Status::Normal,
            version: None,
            report_time: None,
            report_number: 0,
            pool: 0,
            paid: 0,
            informers: BTreeSet::new(),
        }
    }
}

/// Path-verification work done by accepted and rejected reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PathStats {
    pub reports: u64,
    pub hash_ops: u64,
    pub cache_reads: u64,
    pub cache_writes: u64,
    pub path_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct ArgusContract<G: Group> {
    config: ContractConfig,
    owner_pk: G::Point,
    schedule: ExactSchedule,
    pks: Vec<Option<G::Point>>,
    points: Vec<G::Point>,
    point_root: Option<(Digest, u32)>,
    root: Option<(Digest, IdTreeDims)>,
    cache: Option<PathCache>,
    cm_lists: BTreeMap<u32, Vec<CmEntry>>,
    records: Vec<LicenseeRecord>,
    stats: PathStats,
}

fn words(bytes: usize) -> u64 {
    bytes.div_ceil(32) as u64
}

impl<G: Group> ArgusContract<G> {
    /// `owner_pk` checks co-signatures on appeal evidence.
    pub fn new(config: ContractConfig, owner_pk: G::Point) -> crate::Result<Self> {
        if config.licensees == 0 || config.periods == 0 {
            return Err(crate::Error::Config("contract needs at least one licensee and one period".into()));
        }
        let schedule = ExactSchedule::geometric(crate::incentive::units(config.bounty), config.guarantee_len)?;
        let m = config.licensees as usize;
        Ok(Self {
            config,
            owner_pk,
            schedule,
            pks: vec![None; m],
            points: Vec::new(),
            point_root: None,
            root: None,
            cache: None,
            cm_lists: BTreeMap::new(),
            records: vec![LicenseeRecord::default(); m],
            stats: PathStats::default(),
        })
    }

    pub fn config(&self) -> &ContractConfig {
        &self.config
    }

    pub fn schedule(&self) -> &ExactSchedule {
        &self.schedule
    }

    pub fn record(&self, x: u32) -> Option<&LicenseeRecord> {
        x.checked_sub(1).and_then(|i| self.records.get(i as usize))
    }

    pub fn records(&self) -> &[LicenseeRecord] {
        &self.records
    }

    pub fn root(&self) -> Option<Digest> {
        self.root.map(|(r, _)| r)
    }

    pub fn points(&self) -> &[G::Point] {
        &self.points
    }

    pub fn path_stats(&self) -> PathStats {
        self.stats
    }

    pub fn cache(&self) -> Option<&PathCache> {
        self.cache.as_ref()
    }

    /// Truncates `path` to what this contract still needs to see.
    pub fn truncate_path(&self, path: &MerklePath) -> MerklePath {
        match &self.cache {
            Some(c) => c.truncate(path),
            None => path.clone(),
        }
    }

    pub fn commitments(&self, period: u32) -> impl Iterator<Item = (Digest, u32, u32)> + '_ {
        self.cm_lists.get(&period).into_iter().flatten().map(|e| (e.cm, e.x, e.y))
    }

    pub fn immediate_amount(&self, n: u32) -> u128 {
        floor_units(&self.schedule.immediate(n as usize))
    }

    pub fn deferred_amount(&self, n: u32) -> u128 {
        floor_units(&self.schedule.deferred(n as usize))
    }

    fn index(&self, x: u32) -> Result<usize, String> {
        if x == 0 || x > self.config.licensees {
            return Err(format!("no licensee {x}"));
        }
        Ok(x as usize - 1)
    }

    fn owner_only(&self, ctx: &CallContext<Event>) -> Outcome {
        if ctx.caller != self.config.owner {
            return Err("caller is not the owner".into());
        }
        Ok(())
    }

    fn pay(&mut self, ctx: &mut CallContext<Event>, x: usize, to: Address, amount: u128, kind: BountyKind) -> Outcome {
        let rec = &mut self.records[x];
        let amount = amount.min(rec.pool);
        ctx.meter.write_update(1);
        if amount > 0 {
            ctx.send(to, amount)?;
            rec.pool -= amount;
            rec.paid += amount;
        }
        ctx.emit(Event::BountyPaid { x: x as u32 + 1, to, amount, kind });
        Ok(())
    }

    fn set_status(&mut self, ctx: &mut CallContext<Event>, x: usize, next: Status) -> Outcome {
        let rec = &mut self.records[x];
        if !rec.status.can_become(next) {
            return Err(format!("illegal transition {:?} -> {next:?}", rec.status));
        }
        rec.status = next;
        ctx.meter.write_update(1);
        Ok(())
    }

    fn verify_report(&mut self, ctx: &mut CallContext<Event>, rv1: &Digest, path: &MerklePath, informer: Address) -> Outcome {
        let t = ctx.period;
        ctx.meter.read(2);
        let (root, dims) = self.root.ok_or("identity root not stored")?;
        let commit_period = t.checked_sub(1).filter(|&p| p >= 1).ok_or("no commitments precede period 1")?;
        let cm = report_commitment(rv1, &informer);
        ctx.meter.hash(&[32, 20]);
        let list = self.cm_lists.get(&commit_period).map_or(&[][..], Vec::as_slice);
        let mut found = None;
        for (i, e) in list.iter().enumerate() {
            ctx.meter.read(2);
            if !e.consumed && e.cm == cm {
                found = Some(i);
                break;
            }
        }
        let i = found.ok_or_else(|| format!("no open commitment in period {commit_period}"))?;
        let CmEntry { x, y, .. } = list[i];
        if commit_period > dims.periods {
            return Err(format!("period {commit_period} is past the last leaf"));
        }
        let expected = dims.leaf_index(x, y, commit_period).map_err(|e| e.to_string())?;
        if path.leaf_index != expected {
            return Err("path does not point at the committed leaf".into());
        }
        let leaf = leaf_from_reveal(rv1, x, y);
        ctx.meter.hash(&[32, 4, 4]);

        self.stats.reports += 1;
        self.stats.path_bytes += 32 * path.siblings.len() as u64;
        let outcome = match &mut self.cache {
            Some(cache) => cache.verify(&root, &leaf, path).map_err(|e| e.to_string())?,
            None => merkle::CacheOutcome {
                accepted: path.siblings.len() == dims.depth() && merkle::verify(&root, &leaf, path),
                hash_ops: path.siblings.len(),
                ..Default::default()
            },
        };
        self.stats.hash_ops += outcome.hash_ops as u64;
        self.stats.cache_reads += outcome.cache_reads as u64;
        self.stats.cache_writes += outcome.cache_writes as u64;
        ctx.meter.hashes(outcome.hash_ops as u64, crate::crypto::hash_words(&[32, 32]));
        ctx.meter.read(outcome.cache_reads as u64);
        ctx.meter.write_new(outcome.cache_writes as u64);
        if !outcome.accepted {
            return Err("Merkle path does not verify".into());
        }

        self.cm_lists.get_mut(&commit_period).expect("entry found")[i].consumed = true;
        ctx.meter.write_update(1);
        let xi = self.index(x)?;
        ctx.meter.read(1);
        if self.records[xi].status == Status::Normal {
            self.set_status(ctx, xi, Status::Accused)?;
            let rec = &mut self.records[xi];
            rec.report_time = Some(commit_period);
            rec.version = Some(y);
            ctx.meter.write_update(2);
            ctx.emit(Event::Accused { x, version: y, report_time: commit_period });
        }
        let rec = &mut self.records[xi];
        rec.report_number += 1;
        let number = rec.report_number;
        ctx.meter.write_update(1);
        if rec.informers.insert(informer) {
            ctx.meter.write_new(1);
        }
        ctx.emit(Event::Reported { x, y, informer, number });
        let amount = self.immediate_amount(number);
        self.pay(ctx, xi, informer, amount, BountyKind::Immediate)
    }

    /// Shared appeal gates and the opening check `P_l − r·G = R`.
    fn check_appeal(
        &self,
        ctx: &mut CallContext<Event>,
        x: u32,
        l: u32,
        r: &G::Scalar,
        evidence: &OtEvidence<G>,
        opening: Option<&PointOpening<G>>,
    ) -> Result<usize, String> {
        let xi = self.index(x)?;
        ctx.meter.read(words(G::POINT_LEN));
        let pk = self.pks[xi].ok_or("licensee key not registered")?;
        if Address::from_public::<G>(&pk) != ctx.caller {
            return Err("caller is not the accused licensee".into());
        }
        let owner_pk = self.owner_pk;
        let msg = evidence_message::<G>(&evidence.r_point);
        ctx.meter.sig_verify(2);
        ctx.meter.hash(&[msg.len()]);
        ctx.meter.hash(&[msg.len() + Signature::<G>::encoded_len()]);
        if !evidence.signature.verify(&pk, &owner_pk, &msg) {
            return Err("evidence is not signed by owner and licensee".into());
        }
        let p = match self.config.plist_mode {
            PListMode::OnChain => {
                ctx.meter.read(words(G::POINT_LEN));
                *l.checked_sub(1).and_then(|i| self.points.get(i as usize)).ok_or("no such point")?
            }
            PListMode::Committed => {
                let o = opening.ok_or("committed point list needs an opening")?;
                ctx.meter.read(1);
                let (root, count) = self.point_root.ok_or("point root not stored")?;
                if l == 0 || l > count || o.path.leaf_index != (l - 1) as u64 {
                    return Err("opening index mismatch".into());
                }
                ctx.meter.hash(&[16, G::POINT_LEN]);
                ctx.meter.hashes(o.path.siblings.len() as u64, crate::crypto::hash_words(&[32, 32]));
                if !merkle::verify(&root, &point_leaf::<G>(&o.point), &o.path) {
                    return Err("point opening does not verify".into());
                }
                o.point
            }
        };
        ctx.meter.group_op(2);
        if G::sub(&p, &G::base_mul(r)) != evidence.r_point {
            return Err("P_l - r*G does not match R".into());
        }
        ctx.meter.read(3);
        let rec = &self.records[xi];
        if rec.status != Status::Accused {
            return Err(format!("licensee is {:?}, not accused", rec.status));
        }
        if Some(l) == rec.version {
            return Err("opened index equals the leaked version".into());
        }
        let since = ctx.period - rec.report_time.expect("accused has a report time");
        if since > self.config.timeout {
            return Err(format!("appeal {since} periods after report exceeds timeout"));
        }
        Ok(xi)
    }
}

impl<G: Group> Contract for ArgusContract<G> {
    type Call = Call<G>;
    type Event = Event;

    fn execute(&mut self, ctx: &mut CallContext<Event>, call: &Call<G>) -> Outcome {
        match call {
            Call::RegisterLicensee { x, pk } => {
                self.owner_only(ctx)?;
                let xi = self.index(*x)?;
                if self.pks[xi].is_some() {
                    return Err(format!("licensee {x} already registered"));
                }
                self.pks[xi] = Some(*pk);
                ctx.meter.write_new(words(G::POINT_LEN));
                ctx.emit(Event::LicenseeRegistered { x: *x });
                Ok(())
            }
            Call::StorePoints(points) => {
                self.owner_only(ctx)?;
                if self.config.plist_mode != PListMode::OnChain {
                    return Err("point list is committed, not stored".into());
                }
                self.points.extend(points.iter().copied());
                ctx.meter.write_new(words(G::POINT_LEN) * points.len() as u64);
                ctx.emit(Event::PointsStored { total: self.points.len() as u32 });
                Ok(())
            }
            Call::StorePointRoot { root, count } => {
                self.owner_only(ctx)?;
                if self.config.plist_mode != PListMode::Committed || self.point_root.is_some() {
                    return Err("point root not accepted".into());
                }
                self.point_root = Some((*root, *count));
                ctx.meter.write_new(2);
                ctx.emit(Event::PointsStored { total: *count });
                Ok(())
            }
            Call::StoreRoot { root, dims } => {
                self.owner_only(ctx)?;
                if !self.cm_lists.is_empty() {
                    return Err("root is frozen once reporting has started".into());
                }
                if dims.licensees != self.config.licensees || dims.periods != self.config.periods {
                    return Err("tree shape disagrees with the campaign".into());
                }
                if self.root.is_some() {
                    ctx.meter.write_update(2);
                } else {
                    ctx.meter.write_new(2);
                }
                self.root = Some((*root, *dims));
                let depth = dims.depth();
                let (_, dn, dk) = dims.layer_depths();
                self.cache = match self.config.cache {
                    CacheMode::Off => None,
                    CacheMode::Layers => Some(PathCache::new(depth, CachePolicy::Levels([dk, dk + dn].into()))),
                    CacheMode::All => Some(PathCache::new(depth, CachePolicy::All)),
                };
                ctx.emit(Event::RootStored);
                Ok(())
            }
            Call::StoreCommitment { cm, x, y } => {
                let list = self.cm_lists.entry(ctx.period).or_default();
                list.push(CmEntry { cm: *cm, x: *x, y: *y, consumed: false });
                ctx.meter.write_new(2);
                ctx.emit(Event::Committed { period: ctx.period, x: *x, y: *y });
                Ok(())
            }
            Call::Deposit { x } => {
                let xi = self.index(*x)?;
                self.records[xi].pool += ctx.value;
                ctx.meter.read(1);
                ctx.meter.write_update(1);
                ctx.emit(Event::Deposited { x: *x, amount: ctx.value });
                Ok(())
            }
            Call::VerifyReport { rv1, path, informer } => self.verify_report(ctx, rv1, path, *informer),
            Call::VerifyAppeal { x, l, r, evidence, opening } => {
                let xi = self.check_appeal(ctx, *x, *l, r, evidence, opening.as_ref())?;
                self.set_status(ctx, xi, Status::Exonerated)?;
                ctx.emit(Event::Exonerated { x: *x });
                Ok(())
            }
            Call::BaselineAppeal { x, l, r, evidence, transcript, transcript_sig } => {
                if !self.config.baseline_appeal {
                    return Err("baseline appeal disabled".into());
                }
                let owner_pk = self.owner_pk;
                let mut lens = vec![16, G::POINT_LEN];
                lens.extend(transcript.iter().map(Vec::len));
                ctx.meter.hash(&lens);
                ctx.meter.sig_verify(1);
                if !crate::crypto::verify(&owner_pk, &transcript_message::<G>(&evidence.r_point, transcript), transcript_sig) {
                    return Err("transcript is not signed by the owner".into());
                }
                let xi = self.check_appeal(ctx, *x, *l, r, evidence, None)?;
                self.set_status(ctx, xi, Status::Exonerated)?;
                ctx.emit(Event::Exonerated { x: *x });
                Ok(())
            }
            Call::AllocateBounty { informer, x } => {
                let xi = self.index(*x)?;
                if ctx.period < self.config.periods {
                    return Err(format!("campaign runs until period {}", self.config.periods));
                }
                ctx.meter.read(2);
                if !self.records[xi].informers.remove(informer) {
                    return Err("not a pending informer for this licensee".into());
                }
                ctx.meter.write_update(1);
                let amount = self.deferred_amount(self.records[xi].report_number);
                self.pay(ctx, xi, *informer, amount, BountyKind::Deferred)
            }
            Call::SetGuilty { x } => {
                let xi = self.index(*x)?;
                ctx.meter.read(2);
                let rec = &self.records[xi];
                if rec.status != Status::Accused {
                    return Err(format!("licensee is {:?}, not accused", rec.status));
                }
                let since = ctx.period - rec.report_time.expect("accused has a report time");
                if since <= self.config.timeout {
                    return Err(format!("timeout not reached ({since} of {} periods)", self.config.timeout));
                }
                self.set_status(ctx, xi, Status::Guilty)?;
                ctx.emit(Event::Guilty { x: *x });
                Ok(())
            }
        }
    }
}
