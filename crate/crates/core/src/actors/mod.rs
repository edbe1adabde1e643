//! Client-side drivers for every role and a campaign harness that runs them
//! against the simulated ledger.

mod game;

pub use game::{
    guess_hits, monte_carlo_guilty_rate, run_game, run_scenario, scenario_matrix, Assertion, Assignment, GameReport,
    InformerStrategy, InformerView, LicenseeBandwidth, LicenseeStrategy, MonteCarlo, OwnerStrategy, Proposition, Scenario,
};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::commitment::reveal_value;
use crate::contract::{
    point_leaf, report_commitment, transcript_message, ArgusContract, BountyKind, Call, CacheMode, ContractConfig,
    Event, PListMode, PointOpening, Status,
};
use crate::crypto::{Digest, Group, KeyPair, Signature};
use crate::ledger::{Address, GasSchedule, Ledger, Receipt, ReceiptRow, TxStatus};
use crate::merkle::{MerklePath, MerkleTree, OwnerStore};
use crate::ot::{initialize, OtEvidence, OtPublicParams, OtRecord, OwnerOtSecret};
use crate::pir::{hybrid_share, BandwidthLedger, Catalog};
use crate::watermark::{detect, segments_for, Asset, VersionFamily, WatermarkId};
use crate::{Error, Result};

/// Everything needed to stand up a campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub licensees: u32,
    pub versions: u32,
    pub periods: u32,
    pub timeout: u32,
    /// Bounty pool per licensee, in base units.
    pub bounty: u128,
    pub guarantee_len: usize,
    /// Length of the generated asset when no payload is supplied.
    pub asset_len: usize,
    #[serde(skip)]
    pub asset: Option<Vec<u8>>,
    pub cache: CacheMode,
    pub plist_mode: PListMode,
    pub baseline_appeal: bool,
    /// Points per `Store("p")` transaction.
    pub point_batch: usize,
    pub gas: GasSchedule,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            licensees: 2,
            versions: 16,
            periods: 8,
            timeout: 2,
            bounty: 1_000_000,
            guarantee_len: 20,
            asset_len: 1024,
            asset: None,
            cache: CacheMode::default(),
            plist_mode: PListMode::default(),
            baseline_appeal: false,
            point_batch: 256,
            gas: GasSchedule::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<u32> {
        if self.licensees == 0 || self.periods < 2 {
            return Err(Error::Config("need at least one licensee and two periods".into()));
        }
        if self.versions < 2 {
            return Err(Error::Config("need at least two versions".into()));
        }
        if self.point_batch == 0 {
            return Err(Error::Config("point_batch must be positive".into()));
        }
        let segments = segments_for(self.versions as u64)?;
        let len = self.asset.as_ref().map_or(self.asset_len, Vec::len);
        if len < segments as usize * crate::watermark::MARK_REGION {
            return Err(Error::Config(format!("asset of {len} bytes too small for {segments} segments")));
        }
        Ok(segments)
    }
}

#[derive(Clone)]
pub struct OwnerActor<G: Group> {
    pub keys: KeyPair<G>,
    pub address: Address,
    pub params: OtPublicParams<G>,
    secret: OwnerOtSecret<G>,
    pub store: OwnerStore,
    families: Vec<VersionFamily>,
    catalogs: Vec<Option<Catalog>>,
}

impl<G: Group> OwnerActor<G> {
    /// `id_{x,y}`.
    pub fn id(&self, x: u32, y: u32) -> WatermarkId {
        self.families[x as usize - 1].version_id(y as u64 - 1).expect("y within family")
    }

    pub fn version(&self, x: u32, y: u32) -> Vec<u8> {
        self.families[x as usize - 1].version(y as u64 - 1).expect("y within family")
    }

    /// Persistent owner state: the store's serialized form.
    pub fn persistent_bytes(&self) -> usize {
        self.store.to_bytes().len()
    }
}

#[derive(Clone)]
pub struct LicenseeActor<G: Group> {
    pub x: u32,
    pub keys: KeyPair<G>,
    pub address: Address,
    pub record: Option<OtRecord<G>>,
    pub evidence: Option<OtEvidence<G>>,
    pub copy: Option<Vec<u8>>,
    pub transcript: Vec<Vec<u8>>,
    pub transcript_sig: Option<Signature<G>>,
    pub bandwidth: BandwidthLedger,
}

/// A commitment waiting for its reveal period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingReport {
    pub id: WatermarkId,
    pub rv1: Digest,
    pub x: u32,
    pub y: u32,
    pub period: u32,
}

#[derive(Debug, Clone)]
pub struct InformerActor {
    pub label: String,
    pub address: Address,
    pub pending: Vec<PendingReport>,
}

impl InformerActor {
    pub fn new(label: &str) -> Self {
        Self { label: label.to_string(), address: Address::from_label(label), pending: Vec::new() }
    }
}

/// A reveal as any observer of the ledger sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicReveal {
    pub period: u32,
    pub rv1: Digest,
    pub path: MerklePath,
    pub informer: Address,
    pub accepted: bool,
}

#[derive(Clone)]
pub struct Campaign<G: Group> {
    pub config: CampaignConfig,
    segments: u32,
    rng: ChaCha20Rng,
    pub ledger: Ledger<ArgusContract<G>>,
    pub owner: OwnerActor<G>,
    pub licensees: Vec<LicenseeActor<G>>,
    reveals: Vec<PublicReveal>,
}

impl<G: Group> Campaign<G> {
    /// Deploys the contract, publishes the OT points and tree root, and
    /// deposits the bounty pools. Runs in period 1.
    pub fn initiate(config: CampaignConfig, seed: u64) -> Result<Self> {
        let segments = config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let payload = config.asset.clone().unwrap_or_else(|| {
            let mut p = vec![0u8; config.asset_len];
            rng.fill(&mut p[..]);
            p
        });
        let asset = Asset::new(payload, segments)?;

        let keys = KeyPair::<G>::generate(&mut rng);
        let address = Address::from_public::<G>(keys.public());
        let contract = ArgusContract::new(
            ContractConfig {
                owner: address,
                licensees: config.licensees,
                periods: config.periods,
                timeout: config.timeout,
                bounty: config.bounty,
                guarantee_len: config.guarantee_len,
                cache: config.cache,
                plist_mode: config.plist_mode,
                baseline_appeal: config.baseline_appeal,
            },
            *keys.public(),
        )?;
        let mut ledger = Ledger::new(config.gas);
        ledger.deploy(Address::from_label("argus-contract"), contract)?;
        ledger.genesis(address, config.bounty * config.licensees as u128);

        // Small groups have few keys; a repeated key would share an address
        // and be refused a second OT evidence.
        let mut taken = std::collections::HashSet::from([G::encode_point(keys.public())]);
        let licensees: Vec<LicenseeActor<G>> = (1..=config.licensees)
            .map(|x| {
                let keys = (0..1000)
                    .map(|_| KeyPair::<G>::generate(&mut rng))
                    .find(|k| taken.insert(G::encode_point(k.public())))
                    .ok_or_else(|| Error::Config(format!("no distinct key left for licensee {x} in {}", G::NAME)))?;
                Ok(LicenseeActor {
                    x,
                    address: Address::from_public::<G>(keys.public()),
                    keys,
                    record: None,
                    evidence: None,
                    copy: None,
                    transcript: Vec::new(),
                    transcript_sig: None,
                    bandwidth: BandwidthLedger::default(),
                })
            })
            .collect::<Result<_>>()?;

        let (params, secret) = initialize(config.versions, &keys, &mut rng)?;
        let families: Vec<VersionFamily> =
            (0..config.licensees).map(|_| VersionFamily::generate(asset.clone(), &mut rng)).collect();
        let ids: Vec<Vec<WatermarkId>> = families
            .iter()
            .map(|f| (0..config.versions as u64).map(|j| f.version_id(j).expect("j < 2^L")).collect())
            .collect();
        let (tree, store) = OwnerStore::build(&ids, config.periods)?;

        let mut campaign = Self {
            segments,
            rng,
            ledger,
            owner: OwnerActor {
                keys,
                address,
                params,
                secret,
                store,
                families,
                catalogs: vec![None; config.licensees as usize],
            },
            licensees,
            reveals: Vec::new(),
            config,
        };
        let owner = campaign.owner.address;
        for x in 1..=campaign.config.licensees {
            let pk = *campaign.licensees[x as usize - 1].keys.public();
            campaign.require(owner, 0, Call::RegisterLicensee { x, pk })?;
        }
        match campaign.config.plist_mode {
            PListMode::OnChain => {
                let batches: Vec<Vec<G::Point>> =
                    campaign.owner.params.points.chunks(campaign.config.point_batch).map(<[_]>::to_vec).collect();
                for batch in batches {
                    campaign.require(owner, 0, Call::StorePoints(batch))?;
                }
            }
            PListMode::Committed => {
                let root = campaign.point_tree().root();
                let count = campaign.config.versions;
                campaign.require(owner, 0, Call::StorePointRoot { root, count })?;
            }
        }
        campaign.require(owner, 0, Call::StoreRoot { root: tree.root, dims: tree.dims })?;
        for x in 1..=campaign.config.licensees {
            let v = campaign.config.bounty;
            campaign.require(owner, v, Call::Deposit { x })?;
        }
        Ok(campaign)
    }

    fn point_tree(&self) -> MerkleTree {
        MerkleTree::build(self.owner.params.points.iter().map(point_leaf::<G>).collect()).expect("N >= 2")
    }

    pub fn segments(&self) -> u32 {
        self.segments
    }

    pub fn time(&self) -> u32 {
        self.ledger.time()
    }

    pub fn advance(&mut self) -> u32 {
        self.ledger.advance_period()
    }

    pub fn advance_to(&mut self, period: u32) {
        while self.time() < period {
            self.advance();
        }
    }

    pub fn contract(&self) -> &ArgusContract<G> {
        self.ledger.contract().expect("deployed at initiate")
    }

    pub fn status(&self, x: u32) -> Status {
        self.contract().record(x).expect("licensee exists").status
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn submit(&mut self, caller: Address, value: u128, call: Call<G>) -> Result<&Receipt<Event>> {
        self.ledger.submit(caller, value, &call)
    }

    fn require(&mut self, caller: Address, value: u128, call: Call<G>) -> Result<()> {
        match &self.submit(caller, value, call)?.status {
            TxStatus::Success => Ok(()),
            TxStatus::Reverted(why) => Err(Error::Protocol(why.clone())),
        }
    }

    /// Licensee `x` obtains one version by OT (random index unless given).
    /// Returns the chosen index.
    pub fn share(&mut self, x: u32, choice: Option<u32>) -> Result<u32> {
        let xi = x.checked_sub(1).map(|i| i as usize).filter(|&i| i < self.licensees.len());
        let xi = xi.ok_or_else(|| Error::InvalidArgument(format!("no licensee {x}")))?;
        let n = self.config.versions;
        let l = choice.unwrap_or_else(|| self.rng.gen_range(1..=n));
        let record = OtRecord::choose(&self.owner.params, l, &mut self.rng)?;
        let lic = &self.licensees[xi];
        let (r_point, sig) = record.sign(&self.owner.params, &lic.keys)?;
        let evidence = self.owner.secret.cosign(r_point, sig, lic.keys.public(), &self.owner.keys)?;
        if self.owner.catalogs[xi].is_none() {
            let versions: Vec<Vec<u8>> = (1..=n).map(|y| self.owner.version(x, y)).collect();
            self.owner.catalogs[xi] = Some(Catalog::prepare(&versions, &mut self.rng)?);
        }
        let shared = hybrid_share(
            &self.owner.params,
            &self.owner.secret,
            &evidence,
            lic.keys.public(),
            self.owner.keys.public(),
            &record,
            self.owner.catalogs[xi].as_ref().expect("prepared"),
            &mut self.rng,
        )?;
        let transcript_sig = self.owner.keys.sign(&transcript_message::<G>(&evidence.r_point, &shared.transcript));
        let lic = &mut self.licensees[xi];
        lic.record = Some(record);
        lic.evidence = Some(evidence);
        lic.copy = Some(shared.payload);
        lic.transcript = shared.transcript;
        lic.transcript_sig = Some(transcript_sig);
        lic.bandwidth = shared.bandwidth;
        Ok(l)
    }

    /// Detects the copy's id, asks the owner where it sits, and commits in the
    /// current period. `Ok(false)` when the copy is not recognized; nothing
    /// touches the ledger then.
    pub fn commit_report(&mut self, informer: &mut InformerActor, copy: &[u8]) -> Result<bool> {
        let id = match detect(copy, self.segments) {
            Ok(id) => id,
            Err(Error::WatermarkNotDetected) => return Ok(false),
            Err(e) => return Err(e),
        };
        let Some((x, y)) = self.owner.store.id_map().lookup(&id) else {
            return Ok(false);
        };
        self.commit_id(informer, id, x, y)
    }

    /// Commits to `id` at `(x, y)` without consulting the owner.
    pub fn commit_id(&mut self, informer: &mut InformerActor, id: WatermarkId, x: u32, y: u32) -> Result<bool> {
        let period = self.time();
        let rv1 = reveal_value(id.as_ref(), period);
        let cm = report_commitment(&rv1, &informer.address);
        let ok = self.submit(informer.address, 0, Call::StoreCommitment { cm, x, y })?.status.is_success();
        if ok {
            informer.pending.push(PendingReport { id, rv1, x, y, period });
        }
        Ok(ok)
    }

    /// Reveals every commitment made in the previous period. Paths come from
    /// the owner's store and are cut at the contract's cache.
    pub fn reveal_reports(&mut self, informer: &mut InformerActor) -> Result<Vec<(PendingReport, bool)>> {
        let due = self.time().saturating_sub(1);
        let (ready, later): (Vec<_>, Vec<_>) = informer.pending.drain(..).partition(|p| p.period == due);
        informer.pending = later;
        let mut out = Vec::new();
        for p in ready {
            let path = match self.owner.store.query(p.x, p.y, p.period, &p.id) {
                Ok(path) => self.contract().truncate_path(&path),
                Err(_) => {
                    let depth = self.owner.store.dims().depth();
                    let index = self.owner.store.dims().leaf_index(p.x, p.y, p.period).unwrap_or(0);
                    let siblings = (0..depth).map(|_| Digest(self.rng.gen())).collect();
                    MerklePath { leaf_index: index, siblings }
                }
            };
            let accepted = self.reveal_raw(p.rv1, path, informer.address)?;
            out.push((p, accepted));
        }
        Ok(out)
    }

    /// Submits a reveal as given.
    pub fn reveal_raw(&mut self, rv1: Digest, path: MerklePath, informer: Address) -> Result<bool> {
        let period = self.time();
        let call = Call::VerifyReport { rv1, path: path.clone(), informer };
        let accepted = self.submit(informer, 0, call)?.status.is_success();
        self.reveals.push(PublicReveal { period, rv1, path, informer, accepted });
        Ok(accepted)
    }

    pub fn public_reveals(&self) -> &[PublicReveal] {
        &self.reveals
    }

    /// Licensee `x` appeals with its own OT record.
    pub fn appeal(&mut self, x: u32) -> Result<bool> {
        let lic = &self.licensees[x as usize - 1];
        let record = lic.record.ok_or_else(|| Error::Protocol("licensee has no OT record".into()))?;
        self.appeal_with(x, record.l, record.r)
    }

    /// Appeal with an arbitrary opening `(l, r)`.
    pub fn appeal_with(&mut self, x: u32, l: u32, r: G::Scalar) -> Result<bool> {
        let lic = &self.licensees[x as usize - 1];
        let evidence = lic.evidence.ok_or_else(|| Error::Protocol("licensee has no evidence".into()))?;
        let caller = lic.address;
        let opening = match self.config.plist_mode {
            PListMode::OnChain => None,
            PListMode::Committed => {
                let i = l.saturating_sub(1).min(self.config.versions - 1);
                let path = self.point_tree().prove(i as usize)?;
                Some(PointOpening { point: self.owner.params.points[i as usize], path })
            }
        };
        Ok(self.submit(caller, 0, Call::VerifyAppeal { x, l, r, evidence, opening })?.status.is_success())
    }

    /// The transcript-replay appeal, for cost comparison.
    pub fn baseline_appeal(&mut self, x: u32) -> Result<bool> {
        let lic = &self.licensees[x as usize - 1];
        let (record, evidence, sig) = match (lic.record, lic.evidence, lic.transcript_sig) {
            (Some(r), Some(e), Some(s)) => (r, e, s),
            _ => return Err(Error::Protocol("licensee has not completed a share".into())),
        };
        let call = Call::BaselineAppeal {
            x,
            l: record.l,
            r: record.r,
            evidence,
            transcript: lic.transcript.clone(),
            transcript_sig: sig,
        };
        let caller = lic.address;
        Ok(self.submit(caller, 0, call)?.status.is_success())
    }

    pub fn set_guilty(&mut self, x: u32) -> Result<bool> {
        let caller = self.owner.address;
        Ok(self.submit(caller, 0, Call::SetGuilty { x })?.status.is_success())
    }

    pub fn allocate(&mut self, informer: Address, x: u32) -> Result<bool> {
        Ok(self.submit(informer, 0, Call::AllocateBounty { informer, x })?.status.is_success())
    }

    /// Moves past every timeout and settles accused licensees.
    pub fn confirm_infringers(&mut self) -> Result<()> {
        for x in 1..=self.config.licensees {
            let rec = self.contract().record(x).expect("licensee exists").clone();
            if rec.status == Status::Accused {
                let due = rec.report_time.expect("accused") + self.config.timeout + 1;
                self.advance_to(due);
                self.set_guilty(x)?;
            }
        }
        Ok(())
    }

    /// Runs to the end of the campaign and pays every deferred bounty.
    pub fn claim_all(&mut self) -> Result<()> {
        self.advance_to(self.config.periods);
        for x in 1..=self.config.licensees {
            let pending: Vec<Address> = self.contract().record(x).expect("exists").informers.iter().copied().collect();
            for informer in pending {
                self.allocate(informer, x)?;
            }
        }
        Ok(())
    }

    pub fn outcome(&self) -> Outcome {
        let c = self.contract();
        let mut payouts: BTreeMap<Address, Payout> = BTreeMap::new();
        for r in self.ledger.receipts() {
            for e in &r.events {
                if let Event::BountyPaid { to, amount, kind, .. } = e {
                    payouts.entry(*to).or_default().add(*kind, *amount);
                }
            }
        }
        Outcome {
            statuses: c.records().iter().map(|r| r.status).collect(),
            report_numbers: c.records().iter().map(|r| r.report_number).collect(),
            payouts,
            receipts: self.ledger.receipts().iter().map(Receipt::row).collect(),
            total_gas: self.ledger.receipts().iter().map(|r| r.gas_used).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Payout {
    pub immediate: u128,
    pub deferred: u128,
}

impl Payout {
    fn add(&mut self, kind: BountyKind, amount: u128) {
        match kind {
            BountyKind::Immediate => self.immediate += amount,
            BountyKind::Deferred => self.deferred += amount,
        }
    }

    pub fn total(&self) -> u128 {
        self.immediate + self.deferred
    }
}

/// End state of a campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub statuses: Vec<Status>,
    pub report_numbers: Vec<u32>,
    pub payouts: BTreeMap<Address, Payout>,
    pub receipts: Vec<ReceiptRow>,
    pub total_gas: u64,
}

impl Outcome {
    /// Rebuilds the outcome from the receipt log alone.
    pub fn replay(licensees: u32, receipts: &[Receipt<Event>]) -> Self {
        let mut statuses = vec![Status::Normal; licensees as usize];
        let mut report_numbers = vec![0; licensees as usize];
        let mut payouts: BTreeMap<Address, Payout> = BTreeMap::new();
        for r in receipts.iter().filter(|r| r.status.is_success()) {
            for e in &r.events {
                match e {
                    Event::Accused { x, .. } => statuses[*x as usize - 1] = Status::Accused,
                    Event::Exonerated { x } => statuses[*x as usize - 1] = Status::Exonerated,
                    Event::Guilty { x } => statuses[*x as usize - 1] = Status::Guilty,
                    Event::Reported { x, number, .. } => report_numbers[*x as usize - 1] = *number,
                    Event::BountyPaid { to, amount, kind, .. } => payouts.entry(*to).or_default().add(*kind, *amount),
                    _ => {}
                }
            }
        }
        Outcome {
            statuses,
            report_numbers,
            payouts,
            receipts: receipts.iter().map(Receipt::row).collect(),
            total_gas: receipts.iter().map(|r| r.gas_used).sum(),
        }
    }

    pub fn paid_to(&self, who: &Address) -> u128 {
        self.payouts.get(who).map_or(0, Payout::total)
    }
}
