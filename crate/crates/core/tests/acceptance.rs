//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always show.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use argus_core::actors::{
    monte_carlo_guilty_rate, run_scenario, scenario_matrix, Campaign, CampaignConfig, InformerActor,
};
use argus_core::commitment::{commit, verify_reveal, Commitment, PeriodLayout, Reveal, TagList};
use argus_core::contract::CacheMode;
use argus_core::crypto::{hash_parts, Group, KeyPair};
use argus_core::incentive::{units, RewardSchedule};
use argus_core::merkle::OwnerStore;
use argus_core::ot::{decrypt_slot, generate_evidence, initialize, receive, transfer, OtRecord};
use argus_core::pir::{direct_transfer_bytes, hybrid_share, pir_queries, Catalog, Direction, Party};
use argus_core::watermark::WatermarkId;
use argus_core::{ExactSchedule, SecureGroup, Z101};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

type Check = fn() -> Verdict;

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 12] = [
        ("incentive reproduction", Duration::from_secs(1), ac1),
        ("exact reward identities", Duration::from_secs(1), ac2),
        ("sybil-proofness brute force", Duration::from_secs(30), ac3),
        ("OT end-to-end", Duration::from_secs(10), ac4),
        ("false-accusation probability", Duration::from_secs(60), ac5),
        ("constant-size appeal", Duration::from_secs(60), ac6),
        ("multi-period commitment", Duration::from_secs(10), ac7),
        ("merkle path caching", Duration::from_secs(10), ac8),
        ("hybrid transfer bandwidth", Duration::from_secs(30), ac9),
        ("owner storage", Duration::from_secs(30), ac10),
        ("security-game matrix", Duration::from_secs(120), ac11),
        ("obliviousness statistics", Duration::from_secs(60), ac12),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let ok = v.passed && took <= *limit;
        if !ok {
            failed += 1;
        }
        println!(
            "{} AC{:<2} {name}: {} [{:.2}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn f(x: &BigRational) -> f64 {
    x.to_f64().expect("finite")
}

/// Straight-line float recomputation of `B(i, n)` from `c` and `l`.
fn oracle_reward(c: f64, l: usize, i: usize, n: usize) -> f64 {
    let delta = |j: usize| if j <= l { c / l as f64 / 2f64.powi(j as i32) } else { 0.0 };
    let mut xi = vec![0.0; n + 2];
    for j in 1..=n {
        xi[j + 1] = xi[j] / 2.0 + delta(j);
    }
    let later: f64 = xi[i + 1..=n].iter().sum();
    later - xi[i] + c / 2f64.powi(n as i32 - 1)
}

fn ac1() -> Verdict {
    let s = ExactSchedule::geometric(units(1_000_000), 20).unwrap();
    let r = |i| f(&s.reward(i, 20).unwrap());
    let (r1, r5, r10, r18) = (r(1), r(5), r(10), r(18));
    let o10 = oracle_reward(1e6, 20, 10, 20);
    let o18 = oracle_reward(1e6, 20, 18, 20);
    let ok = (r1 - 99_999.90).abs() <= 0.002 * 99_999.90
        && (r5 - 6_249.90).abs() <= 0.002 * 6_249.90
        && (r10 - 196.0).abs() <= 1.0
        && (r10 - o10).abs() <= 1.0
        && (o10 - 195.22).abs() <= 0.01
        && (r18 - o18).abs() <= 1e-3
        && (o18 - 0.6676).abs() <= 1e-3;
    verdict(
        ok,
        format!("reward(1,20)={r1:.2} reward(5,20)={r5:.2} reward(10,20)={r10:.2} (oracle {o10:.2}) reward(18,20)={r18:.4} (oracle {o18:.4})"),
    )
}

fn ac2() -> Verdict {
    let c = units(1_000_000);
    let s = ExactSchedule::geometric(c.clone(), 20).unwrap();
    let two = units(2);
    let recurrence = (1..=40).all(|i| s.xi(i + 1) == s.xi(i) / two.clone() + s.delta(i));
    let weighted = (1..=20).fold(BigRational::zero(), |acc, j| acc + s.delta(j) * units(1 << j));
    let tail_zero = (20..=80).all(|n| s.deferred(n).is_zero());
    let split = (1..=40).all(|n| (1..=n).all(|i| s.reward(i, n).unwrap() == s.immediate(i) + s.deferred(n)));
    verdict(
        recurrence && weighted == c && tail_zero && split,
        format!("xi recurrence {recurrence}, sum 2^j*delta_j = c {}, deferred(n>=20) = 0 {tail_zero}, reward = immediate + deferred {split}", weighted == c),
    )
}

fn ac3() -> Verdict {
    let geometric = ExactSchedule::geometric(units(1_000_000), 20).unwrap().check_sybil_proof(8);
    let legacy = RewardSchedule::<BigRational>::legacy(units(1_000_000)).unwrap().check_sybil_proof(8);
    verdict(geometric && legacy, format!("max_n=8 geometric {geometric}, legacy {legacy}"))
}

fn ac4() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut runs = 0;
    let mut wrong_rejected = 0;
    let mut wrong_total = 0;
    for n in [2u32, 16, 32] {
        let owner = KeyPair::<SecureGroup>::generate(&mut rng);
        let (params, mut secret) = initialize(n, &owner, &mut rng).unwrap();
        let data: Vec<Vec<u8>> = (0..n).map(|_| (0..rng.gen_range(1..200)).map(|_| rng.gen()).collect()).collect();
        for l in 1..=n {
            let licensee = KeyPair::<SecureGroup>::generate(&mut rng);
            let rec = OtRecord::choose(&params, l, &mut rng).unwrap();
            let ev = generate_evidence(&params, &mut secret, &rec, &licensee, &owner).unwrap();
            let e = transfer(&params, &secret, &ev, licensee.public(), owner.public(), &data).unwrap();
            if receive(&e, &rec, &params.a_s).unwrap() != data[l as usize - 1] {
                return verdict(false, format!("N={n} l={l} did not recover D_l"));
            }
            runs += 1;
            let q = SecureGroup::mul(&params.a_s, &rec.r);
            for j in (1..=n).filter(|&j| j != l) {
                wrong_total += 1;
                if decrypt_slot::<SecureGroup>(&e, &q, &params.a_s, j).is_err() {
                    wrong_rejected += 1;
                }
            }
        }
    }
    verdict(
        wrong_rejected == wrong_total,
        format!("{runs} transfers recovered D_l, {wrong_rejected}/{wrong_total} wrong slots failed the checksum"),
    )
}

fn ac5() -> Verdict {
    let config = CampaignConfig {
        licensees: 1,
        versions: 100,
        periods: 2,
        timeout: 1,
        asset_len: 160,
        ..Default::default()
    };
    let trials = 10_000;
    let mc = monte_carlo_guilty_rate::<Z101>(&config, trials, 500).unwrap();
    let rate = mc.exonerated as f64 / trials as f64;
    let sigma = (0.99f64 * 0.01 / trials as f64).sqrt();
    verdict(
        mc.accused == trials && (rate - 0.99).abs() <= 3.0 * sigma,
        format!(
            "N=100, {trials} trials: exonerated {:.4} (|dev| {:.4} vs 3 sigma {:.4}), guilty {}",
            rate,
            (rate - 0.99).abs(),
            3.0 * sigma,
            mc.guilty
        ),
    )
}

/// Calldata and gas of the constant-size and the transcript appeal at `n`.
fn appeal_costs(n: u32) -> (usize, u64, usize, u64) {
    let config = CampaignConfig {
        licensees: 1,
        versions: n,
        periods: 2,
        timeout: 2,
        asset_len: 320,
        baseline_appeal: true,
        ..Default::default()
    };
    let mut c = Campaign::<SecureGroup>::initiate(config, n as u64).unwrap();
    let l = c.share(1, None).unwrap();
    let y = l % n + 1;
    let mut accuser = InformerActor::new("accuser");
    let id = c.owner.id(1, y);
    c.commit_id(&mut accuser, id, 1, y).unwrap();
    c.advance();
    assert!(c.reveal_reports(&mut accuser).unwrap()[0].1);
    let mut baseline = c.clone();
    assert!(c.appeal(1).unwrap());
    assert!(baseline.baseline_appeal(1).unwrap());
    let a = c.ledger.receipts().last().unwrap();
    let b = baseline.ledger.receipts().last().unwrap();
    (a.calldata_bytes, a.gas_used, b.calldata_bytes, b.gas_used)
}

fn ac6() -> Verdict {
    let sweep = [10u32, 100, 1000, 10_000];
    let costs: Vec<_> = sweep.iter().map(|&n| appeal_costs(n)).collect();
    let constant = costs.iter().all(|c| c.0 == costs[0].0);
    let slope = |a: usize, b: usize| (costs[b].2 - costs[a].2) as f64 / (sweep[b] - sweep[a]) as f64;
    let linear = (slope(0, 1) - slope(2, 3)).abs() < 1e-9 && (slope(1, 2) - slope(2, 3)).abs() < 1e-9;
    let (_, gas, _, base_gas) = costs[3];
    let ratio = base_gas as f64 / gas as f64;
    let table: Vec<String> = sweep.iter().zip(&costs).map(|(n, c)| format!("N={n}: {}B/{}B", c.0, c.2)).collect();
    verdict(
        constant && linear && ratio >= 100.0,
        format!("{} ; gas ratio at N=10^4 {ratio:.0}x ({base_gas} vs {gas})", table.join(", ")),
    )
}

fn ac7() -> Verdict {
    let mut cases = 0u64;
    let mut honest_ok = true;
    let mut replay_rejected = true;
    for k in 1..=16u32 {
        let secret = format!("copy-{k}");
        let tags = TagList::build(secret.as_bytes(), k).unwrap();
        for i in 1..=k {
            let (cm, rv) = commit(secret.as_bytes(), i, [i as u8; 16]).unwrap();
            honest_ok &= verify_reveal(&cm, &rv, &tags, i, i + 1);
            for later in i + 2..=k + 2 {
                cases += 1;
                // Original opening presented late.
                replay_rejected &= !verify_reveal(&cm, &rv, &tags, i, later);
                // Observed opening re-committed by someone else in a later period.
                let p = later - 1;
                let nonce = [0xAA; 16];
                let re = Commitment { cm: hash_parts(&[rv.rv.as_ref(), &nonce]), period: p };
                replay_rejected &= !verify_reveal(&re, &Reveal { rv: rv.rv, nonce }, &tags, p, p + 1);
            }
        }
    }
    let layout = PeriodLayout::new(Duration::from_secs(180 * 86_400), 1000).unwrap();
    let hours = layout.confirmation_bound().quoted_hours();
    verdict(
        honest_ok && replay_rejected && hours == 4.32,
        format!("honest accepted {honest_ok}, {cases} replays rejected {replay_rejected}, bound(180d, K=1000) = {hours} h"),
    )
}

/// Hash operations and verify-report gas for 50 reports against licensee 1.
fn cached_batch(mode: CacheMode) -> (u64, u64, u64) {
    let config = CampaignConfig {
        licensees: 4,
        versions: 1024,
        periods: 64,
        asset_len: 256,
        cache: mode,
        ..Default::default()
    };
    let mut c = Campaign::<SecureGroup>::initiate(config, 8).unwrap();
    c.share(1, None).unwrap();
    let copy = c.licensees[0].copy.clone().unwrap();
    let mut crowd: Vec<InformerActor> = (0..50).map(|k| InformerActor::new(&format!("informer-{k}"))).collect();
    for batch in crowd.chunks_mut(5) {
        for i in batch.iter_mut() {
            assert!(c.commit_report(i, &copy).unwrap());
        }
        c.advance();
        for i in batch.iter_mut() {
            assert!(c.reveal_reports(i).unwrap().iter().all(|r| r.1));
        }
    }
    let gas = c.ledger.receipts().iter().filter(|r| r.call == "verify_report").map(|r| r.gas_used).sum();
    let stats = c.contract().path_stats();
    (stats.hash_ops, gas, stats.path_bytes)
}

fn ac8() -> Verdict {
    let (plain_ops, plain_gas, plain_bytes) = cached_batch(CacheMode::Off);
    let (ops, gas, bytes) = cached_batch(CacheMode::Layers);
    let ratio = ops as f64 / plain_ops as f64;
    verdict(
        ratio <= 0.8,
        format!(
            "hash ops {ops} vs {plain_ops} ({ratio:.3}x); path bytes {bytes} vs {plain_bytes}; report gas {gas} vs {plain_gas} ({:.3}x)",
            gas as f64 / plain_gas as f64
        ),
    )
}

fn ac9() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let (n, size) = (1000u32, 4096usize);
    let payloads: Vec<Vec<u8>> = (0..n).map(|_| (0..size).map(|_| rng.gen()).collect()).collect();
    let owner = KeyPair::<SecureGroup>::generate(&mut rng);
    let licensee = KeyPair::<SecureGroup>::generate(&mut rng);
    let (params, mut secret) = initialize(n, &owner, &mut rng).unwrap();
    let catalog = Catalog::prepare(&payloads, &mut rng).unwrap();
    let l = 417;
    let rec = OtRecord::choose(&params, l, &mut rng).unwrap();
    let ev = generate_evidence(&params, &mut secret, &rec, &licensee, &owner).unwrap();
    let shared =
        hybrid_share(&params, &secret, &ev, licensee.public(), owner.public(), &rec, &catalog, &mut rng).unwrap();
    let received = shared.bandwidth.total(Party::Licensee, Direction::Received);
    let bound = 3 * (size as u64 + n as u64 * 32);
    let direct = direct_transfer_bytes(&payloads);
    verdict(
        shared.payload == payloads[l as usize - 1] && received <= bound && direct >= n as u64 * size as u64,
        format!("hybrid received {received} B <= {bound} B; direct {direct} B"),
    )
}

fn ac10() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let (m, n) = (4usize, 1000usize);
    let ids: Vec<Vec<WatermarkId>> = (0..m).map(|_| (0..n).map(|_| WatermarkId::random(&mut rng)).collect()).collect();
    let per_licensee: BTreeMap<u32, usize> = [10u32, 100]
        .iter()
        .map(|&k| {
            let (_, store) = OwnerStore::build(&ids, k).unwrap();
            assert_eq!(store.digest_count(), m * n);
            (k, store.to_bytes().len() / m)
        })
        .collect();
    let (a, b) = (per_licensee[&10], per_licensee[&100]);
    verdict(a == b && a <= 64 * n, format!("N=1000: {a} B/licensee at K=10, {b} B at K=100, bound {}", 64 * n))
}

fn ac11() -> Verdict {
    let config = CampaignConfig { versions: 16, periods: 8, timeout: 2, asset_len: 256, ..Default::default() };
    let mut failures = Vec::new();
    let matrix = scenario_matrix();
    for s in &matrix {
        let report = run_scenario::<SecureGroup>(&config, s, 2024).unwrap();
        failures.extend(report.assertions.iter().filter(|a| !a.passed).map(|a| format!("{}: {}", s.name, a.check)));
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} scenarios, all interest assertions hold", matrix.len())
        } else {
            failures.join("; ")
        },
    )
}

/// p-value of the chi-square independence test on a contingency table.
fn independence_p(table: &[Vec<u64>]) -> f64 {
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let total: f64 = rows.iter().sum();
    let mut stat = 0.0;
    let mut used_cols = 0;
    for (j, cj) in cols.iter().enumerate() {
        if *cj == 0.0 {
            continue;
        }
        used_cols += 1;
        for (i, ri) in rows.iter().enumerate() {
            let expected = ri * cj / total;
            stat += (table[i][j] as f64 - expected).powi(2) / expected;
        }
    }
    let df = ((rows.len() - 1) * (used_cols - 1)) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

fn ac12() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let n = 4u32;
    let samples = 100_000;
    let owner = KeyPair::<Z101>::generate(&mut rng);
    let (params, _) = initialize(n, &owner, &mut rng).unwrap();
    let mut r_table = vec![vec![0u64; 101]; n as usize];
    let mut q1_table = vec![vec![0u64; 1 << n]; n as usize];
    let mut q2_table = vec![vec![0u64; 1 << n]; n as usize];
    for _ in 0..samples {
        let l = rng.gen_range(1..=n);
        let rec = OtRecord::choose(&params, l, &mut rng).unwrap();
        r_table[l as usize - 1][rec.blinded(&params).unwrap() as usize] += 1;
        let (q1, q2) = pir_queries(n, l, &mut rng).unwrap();
        q1_table[l as usize - 1][q1.as_u64() as usize] += 1;
        q2_table[l as usize - 1][q2.as_u64() as usize] += 1;
    }
    let (pr, p1, p2) = (independence_p(&r_table), independence_p(&q1_table), independence_p(&q2_table));
    verdict(
        pr > 0.01 && p1 > 0.01 && p2 > 0.01,
        format!("{samples} samples: p(R vs l)={pr:.3}, p(server1 mask vs l)={p1:.3}, p(server2 mask vs l)={p2:.3}"),
    )
}
