use argus_core::actors::{Campaign, CampaignConfig, InformerActor};
use argus_core::contract::{report_commitment, BountyKind, CacheMode, Call, Event, PListMode, Status};
use argus_core::crypto::{Digest, Group};
use argus_core::ledger::Address;
use argus_core::merkle::IdTreeDims;
use argus_core::watermark::WatermarkId;
use argus_core::{SecureGroup, Z101};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn config() -> CampaignConfig {
    CampaignConfig { licensees: 2, versions: 16, periods: 8, timeout: 2, asset_len: 256, ..Default::default() }
}

fn shared<G: Group>(cfg: CampaignConfig, seed: u64) -> Campaign<G> {
    let mut c = Campaign::<G>::initiate(cfg, seed).unwrap();
    for x in 1..=c.config.licensees {
        c.share(x, None).unwrap();
    }
    c
}

fn copy<G: Group>(c: &Campaign<G>, x: u32) -> Vec<u8> {
    c.licensees[x as usize - 1].copy.clone().unwrap()
}

fn report<G: Group>(c: &mut Campaign<G>, informer: &mut InformerActor, x: u32) -> bool {
    let copy = copy(c, x);
    assert!(c.commit_report(informer, &copy).unwrap());
    c.advance();
    let r = c.reveal_reports(informer).unwrap();
    r.len() == 1 && r[0].1
}

#[test]
fn initiate_commits_every_leaf_and_funds_pools() {
    let c = shared::<SecureGroup>(config(), 1);
    let dims = c.owner.store.dims();
    assert_eq!(dims.leaf_count(), 2 * 16 * 8);
    assert_eq!(c.owner.store.digest_count(), 2 * 16);
    let contract = c.ledger.contract_address().unwrap();
    assert_eq!(c.ledger.balance(&contract), 2 * c.config.bounty);
    assert_eq!(c.contract().points().len(), 16);
    assert_eq!(c.contract().root(), Some(c.owner.store.root()));
}

#[test]
fn shared_copy_detects_as_owner_identity() {
    let mut c = Campaign::<SecureGroup>::initiate(config(), 2).unwrap();
    for x in 1..=2 {
        let l = c.share(x, None).unwrap();
        let id = argus_core::watermark::detect(&copy(&c, x), c.segments()).unwrap();
        assert_eq!(id, c.owner.id(x, l));
        assert_eq!(c.owner.store.id_map().lookup(&id), Some((x, l)));
    }
}

#[test]
fn config_errors_precede_ledger_writes() {
    let bad = CampaignConfig { versions: 1 << 21, ..config() };
    assert!(Campaign::<Z101>::initiate(bad, 1).is_err());
    let bad = CampaignConfig { asset_len: 8, ..config() };
    assert!(Campaign::<Z101>::initiate(bad, 1).is_err());
    let bad = CampaignConfig { periods: 1, ..config() };
    assert!(Campaign::<Z101>::initiate(bad, 1).is_err());
}

#[test]
fn owner_only_stores_and_frozen_root() {
    let mut c = shared::<SecureGroup>(config(), 3);
    let root = c.owner.store.root();
    let dims = c.owner.store.dims();
    let stranger = Address::from_label("stranger");
    assert!(!c.submit(stranger, 0, Call::StoreRoot { root, dims }).unwrap().status.is_success());
    assert!(!c.submit(stranger, 0, Call::StorePoints(vec![])).unwrap().status.is_success());
    let wrong = IdTreeDims::new(3, 16, 8).unwrap();
    let owner = c.owner.address;
    assert!(!c.submit(owner, 0, Call::StoreRoot { root, dims: wrong }).unwrap().status.is_success());

    let mut i = InformerActor::new("i");
    c.commit_id(&mut i, WatermarkId([7; 16]), 1, 1).unwrap();
    assert!(!c.submit(owner, 0, Call::StoreRoot { root, dims }).unwrap().status.is_success());
    assert_eq!(c.contract().root(), Some(root));
}

#[test]
fn two_commitments_in_one_period_keep_order() {
    let mut c = shared::<Z101>(config(), 4);
    let a = Digest([1; 32]);
    let b = Digest([2; 32]);
    let who = Address::from_label("x");
    c.submit(who, 0, Call::StoreCommitment { cm: a, x: 1, y: 2 }).unwrap();
    c.submit(who, 0, Call::StoreCommitment { cm: b, x: 2, y: 3 }).unwrap();
    let list: Vec<_> = c.contract().commitments(1).collect();
    assert_eq!(list, vec![(a, 1, 2), (b, 2, 3)]);
}

#[test]
fn honest_report_then_second_informer() {
    let mut c = shared::<SecureGroup>(config(), 5);
    let mut i1 = InformerActor::new("i1");
    let mut i2 = InformerActor::new("i2");
    let leaked = copy(&c, 1);
    c.commit_report(&mut i1, &leaked).unwrap();
    c.commit_report(&mut i2, &leaked).unwrap();
    c.advance();
    assert!(c.reveal_reports(&mut i1).unwrap()[0].1);
    assert_eq!(c.status(1), Status::Accused);
    let rec = c.contract().record(1).unwrap().clone();
    assert_eq!(rec.version, Some(c.licensees[0].record.unwrap().l));
    assert_eq!(rec.report_time, Some(1));
    assert!(c.reveal_reports(&mut i2).unwrap()[0].1);
    let rec = c.contract().record(1).unwrap();
    assert_eq!(rec.report_number, 2);
    assert_eq!(rec.status, Status::Accused);
    let one = c.contract().immediate_amount(1);
    let two = c.contract().immediate_amount(2);
    assert!(two < one);
    assert_eq!(c.ledger.balance(&i1.address), one);
    assert_eq!(c.ledger.balance(&i2.address), two);
}

#[test]
fn replayed_reveals_are_rejected() {
    let mut c = shared::<SecureGroup>(config(), 6);
    let mut honest = InformerActor::new("honest");
    assert!(report(&mut c, &mut honest, 1));
    let seen = c.public_reveals()[0].clone();
    let attacker = Address::from_label("attacker");
    // Same period under the attacker's address.
    assert!(!c.reveal_raw(seen.rv1, seen.path.clone(), attacker).unwrap());
    // Same tuple again.
    assert!(!c.reveal_raw(seen.rv1, seen.path.clone(), honest.address).unwrap());
    // Fresh commitment, reveal one period later.
    let cm = report_commitment(&seen.rv1, &attacker);
    c.submit(attacker, 0, Call::StoreCommitment { cm, x: 1, y: 1 }).unwrap();
    c.advance();
    assert!(!c.reveal_raw(seen.rv1, seen.path, attacker).unwrap());
    assert_eq!(c.contract().record(1).unwrap().report_number, 1);
    assert_eq!(c.ledger.balance(&attacker), 0);
}

#[test]
fn appeal_gates() {
    // Innocent licensee accused under another version is exonerated.
    let mut c = shared::<SecureGroup>(config(), 7);
    let l = c.licensees[0].record.unwrap().l;
    let y = if l == 1 { 2 } else { 1 };
    let mut accuser = InformerActor::new("accuser");
    let id = c.owner.id(1, y);
    c.commit_id(&mut accuser, id, 1, y).unwrap();
    c.advance();
    assert!(c.reveal_reports(&mut accuser).unwrap()[0].1);
    // Only the accused licensee may appeal.
    let mut wrong_caller = c.clone();
    let ev = wrong_caller.licensees[0].evidence.unwrap();
    let rec = wrong_caller.licensees[0].record.unwrap();
    let outsider = wrong_caller.licensees[1].address;
    let call = Call::VerifyAppeal { x: 1, l: rec.l, r: rec.r, evidence: ev, opening: None };
    assert!(!wrong_caller.submit(outsider, 0, call).unwrap().status.is_success());
    // After the timeout even a valid record fails.
    let mut late = c.clone();
    late.advance_to(1 + late.config.timeout + 1);
    assert!(!late.appeal(1).unwrap());
    assert!(late.set_guilty(1).unwrap());
    assert_eq!(late.status(1), Status::Guilty);

    assert!(c.appeal(1).unwrap());
    assert_eq!(c.status(1), Status::Exonerated);
    assert!(!c.appeal(1).unwrap());
    c.advance_to(10);
    assert!(!c.set_guilty(1).unwrap());
    assert_eq!(c.status(1), Status::Exonerated);
}

#[test]
fn guilty_licensee_cannot_appeal_and_set_guilty_waits() {
    let mut c = shared::<SecureGroup>(config(), 8);
    let mut i = InformerActor::new("i");
    assert!(report(&mut c, &mut i, 1));
    assert!(!c.appeal(1).unwrap());
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let l = c.licensees[0].record.unwrap().l % 16 + 1;
    assert!(!c.appeal_with(1, l, SecureGroup::random_scalar(&mut rng)).unwrap());
    assert!(!c.set_guilty(1).unwrap());
    c.advance_to(1 + c.config.timeout);
    assert!(!c.set_guilty(1).unwrap());
    c.advance();
    assert!(c.set_guilty(1).unwrap());
    assert_eq!(c.status(1), Status::Guilty);
}

#[test]
fn committed_point_list_appeal() {
    let cfg = CampaignConfig { plist_mode: PListMode::Committed, ..config() };
    let mut c = shared::<SecureGroup>(cfg, 9);
    assert!(c.contract().points().is_empty());
    let l = c.licensees[1].record.unwrap().l;
    let y = l % 16 + 1;
    let mut accuser = InformerActor::new("accuser");
    let id = c.owner.id(2, y);
    c.commit_id(&mut accuser, id, 2, y).unwrap();
    c.advance();
    c.reveal_reports(&mut accuser).unwrap();
    assert!(c.appeal(2).unwrap());
    assert_eq!(c.status(2), Status::Exonerated);
}

#[test]
fn deferred_claims_once_after_campaign_end() {
    let mut c = shared::<SecureGroup>(config(), 10);
    let mut i = InformerActor::new("i");
    assert!(report(&mut c, &mut i, 2));
    assert!(!c.allocate(i.address, 2).unwrap());
    c.advance_to(c.config.periods);
    let before = c.ledger.balance(&i.address);
    assert!(c.allocate(i.address, 2).unwrap());
    assert_eq!(c.ledger.balance(&i.address) - before, c.contract().deferred_amount(1));
    assert!(!c.allocate(i.address, 2).unwrap());
    assert!(!c.allocate(Address::from_label("nobody"), 2).unwrap());
}

#[test]
fn deferred_is_zero_past_guarantee_len() {
    let cfg = CampaignConfig { guarantee_len: 3, ..config() };
    let mut c = shared::<Z101>(cfg, 11);
    let leaked = copy(&c, 1);
    let mut crowd: Vec<InformerActor> = (0..4).map(|k| InformerActor::new(&format!("i{k}"))).collect();
    for i in crowd.iter_mut() {
        c.commit_report(i, &leaked).unwrap();
    }
    c.advance();
    for i in crowd.iter_mut() {
        assert!(c.reveal_reports(i).unwrap()[0].1);
    }
    assert_eq!(c.contract().deferred_amount(4), 0);
    c.advance_to(c.config.periods);
    for i in &crowd {
        assert!(c.allocate(i.address, 1).unwrap());
    }
    assert!(c.contract().record(1).unwrap().informers.is_empty());
}

#[test]
fn immediate_payouts_fall_in_report_order() {
    let cfg = CampaignConfig { bounty: 1_000_000_000, ..config() };
    let mut c = shared::<Z101>(cfg, 12);
    let leaked = copy(&c, 1);
    let mut crowd: Vec<InformerActor> = (0..15).map(|k| InformerActor::new(&format!("i{k}"))).collect();
    for i in crowd.iter_mut() {
        c.commit_report(i, &leaked).unwrap();
    }
    c.advance();
    for i in crowd.iter_mut() {
        c.reveal_reports(i).unwrap();
    }
    let paid: Vec<u128> = c
        .ledger
        .receipts()
        .iter()
        .flat_map(|r| r.events.iter())
        .filter_map(|e| match e {
            Event::BountyPaid { amount, kind: BountyKind::Immediate, .. } => Some(*amount),
            _ => None,
        })
        .collect();
    assert_eq!(paid.len(), 15);
    assert!(paid.windows(2).all(|w| w[0] > w[1]), "{paid:?}");
}

#[test]
fn cache_modes_agree_and_cached_paths_shrink() {
    let mut stats = Vec::new();
    for mode in [CacheMode::Off, CacheMode::Layers, CacheMode::All] {
        let cfg = CampaignConfig { cache: mode, licensees: 1, bounty: 1 << 60, ..config() };
        let mut c = shared::<Z101>(cfg, 13);
        let leaked = copy(&c, 1);
        let mut crowd: Vec<InformerActor> = (0..10).map(|k| InformerActor::new(&format!("i{k}"))).collect();
        for i in crowd.iter_mut() {
            c.commit_report(i, &leaked).unwrap();
        }
        c.advance();
        let mut accepted = 0;
        for i in crowd.iter_mut() {
            accepted += c.reveal_reports(i).unwrap().iter().filter(|r| r.1).count();
        }
        assert_eq!(accepted, 10);
        stats.push(c.contract().path_stats());
    }
    assert!(stats[1].path_bytes < stats[0].path_bytes);
    assert!(stats[1].hash_ops < stats[0].hash_ops);
    assert!(stats[2].hash_ops <= stats[1].hash_ops);
}

#[test]
fn baseline_appeal_is_gated_and_works_when_enabled() {
    for enabled in [false, true] {
        let cfg = CampaignConfig { baseline_appeal: enabled, ..config() };
        let mut c = shared::<SecureGroup>(cfg, 14);
        let l = c.licensees[0].record.unwrap().l;
        let y = l % 16 + 1;
        let mut accuser = InformerActor::new("accuser");
        let id = c.owner.id(1, y);
        c.commit_id(&mut accuser, id, 1, y).unwrap();
        c.advance();
        c.reveal_reports(&mut accuser).unwrap();
        assert_eq!(c.baseline_appeal(1).unwrap(), enabled);
    }
}

/// Random call sequences from every party never break the state machine
/// or the pools.
#[test]
fn fuzzed_call_sequences_keep_invariants() {
    let cfg = CampaignConfig { versions: 8, periods: 4, timeout: 1, asset_len: 128, bounty: 1000, ..config() };
    let base = shared::<Z101>(cfg, 15);
    let supply = base.ledger.supply();
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let mut reached = std::collections::BTreeSet::new();
    for _ in 0..10_000 {
        let mut c = base.clone();
        let mut crowd: Vec<InformerActor> = (0..3).map(|k| InformerActor::new(&format!("f{k}"))).collect();
        let mut prev = c.contract().records().to_vec();
        for _ in 0..rng.gen_range(1..25) {
            let x = rng.gen_range(1..=2u32);
            let who = rng.gen_range(0..crowd.len());
            match rng.gen_range(0..9) {
                0 => {
                    let leaked = copy(&c, x);
                    c.commit_report(&mut crowd[who], &leaked).unwrap();
                }
                1 => {
                    let y = rng.gen_range(1..=8);
                    let id = if rng.gen_bool(0.5) { c.owner.id(x, y) } else { WatermarkId::random(&mut rng) };
                    c.commit_id(&mut crowd[who], id, x, y).unwrap();
                }
                2 => {
                    c.reveal_reports(&mut crowd[who]).unwrap();
                }
                3 => {
                    c.appeal(x).unwrap();
                }
                4 => {
                    let r = Z101::random_scalar(&mut rng);
                    c.appeal_with(x, rng.gen_range(0..=9), r).unwrap();
                }
                5 => {
                    c.set_guilty(x).unwrap();
                }
                6 => {
                    c.allocate(crowd[who].address, x).unwrap();
                }
                7 => {
                    let d = Digest(rng.gen());
                    let stranger = crowd[who].address;
                    c.submit(stranger, 0, Call::SetGuilty { x: rng.gen_range(0..=3) }).unwrap();
                    c.submit(stranger, 0, Call::StoreCommitment { cm: d, x, y: 1 }).unwrap();
                }
                _ => {
                    c.advance();
                }
            }
            let now = c.contract().records().to_vec();
            for (p, n) in prev.iter().zip(&now) {
                assert!(p.status == n.status || p.status.can_become(n.status), "{:?} -> {:?}", p.status, n.status);
                assert!(n.report_number >= p.report_number);
                if p.version.is_some() {
                    assert_eq!(p.version, n.version);
                }
                assert!(n.paid <= c.config.bounty);
                assert_eq!(n.paid + n.pool, c.config.bounty);
            }
            assert_eq!(c.ledger.supply(), supply);
            reached.extend(now.iter().map(|r| r.status));
            prev = now;
        }
    }
    assert_eq!(reached.len(), 4, "fuzzer reached only {reached:?}");
}
