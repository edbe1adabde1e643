//! Parameter sweeps written as CSV.

use std::path::Path;
use std::time::Instant;

use argus_core::actors::{Campaign, CampaignConfig, InformerActor};
use argus_core::contract::CacheMode;
use argus_core::crypto::{Group, KeyPair};
use argus_core::ot::{generate_evidence, initialize, receive, transfer, OtRecord};
use argus_core::pir::{direct_transfer_bytes, hybrid_share, Catalog, Direction, Party};
use argus_core::SecureGroup;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::config_error;
use crate::output::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dimension {
    /// Appeal calldata and gas against the full-list baseline, per N.
    AppealSize,
    /// OT initialize / transfer / receive wall time, per N.
    OtLatency,
    /// Path caching on versus off, per number of reports.
    Caching,
    /// Hybrid share bytes against direct OT of every payload, per N.
    Bandwidth,
}

impl Dimension {
    pub fn default_sweep(self) -> Vec<u32> {
        match self {
            Dimension::AppealSize => vec![10, 100, 1000, 10_000],
            Dimension::OtLatency => vec![10, 100, 1000],
            Dimension::Caching => vec![10, 50, 100],
            Dimension::Bandwidth => vec![10, 100, 1000],
        }
    }

    fn file(self) -> &'static str {
        match self {
            Dimension::AppealSize => "bench-appeal-size.csv",
            Dimension::OtLatency => "bench-ot-latency.csv",
            Dimension::Caching => "bench-caching.csv",
            Dimension::Bandwidth => "bench-bandwidth.csv",
        }
    }
}

#[derive(Serialize)]
struct AppealRow {
    n: u32,
    argus_bytes: usize,
    argus_gas: u64,
    baseline_bytes: usize,
    baseline_gas: u64,
    gas_ratio: f64,
}

#[derive(Serialize)]
struct LatencyRow {
    n: u32,
    owner_init_ms: f64,
    owner_transfer_ms: f64,
    licensee_receive_ms: f64,
}

#[derive(Serialize)]
struct CachingRow {
    reports: u32,
    cache: CacheMode,
    hash_ops: u64,
    path_bytes: u64,
    report_gas: u64,
}

#[derive(Serialize)]
struct BandwidthRow {
    n: u32,
    payload: usize,
    hybrid_received: u64,
    direct: u64,
    bound: u64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn appeal_row(n: u32, seed: u64) -> anyhow::Result<AppealRow> {
    let config = CampaignConfig {
        licensees: 1,
        versions: n,
        periods: 2,
        timeout: 2,
        asset_len: 320,
        baseline_appeal: true,
        ..Default::default()
    };
    let mut c = Campaign::<SecureGroup>::initiate(config, seed)?;
    let l = c.share(1, None)?;
    let y = l % n + 1;
    let mut accuser = InformerActor::new("accuser");
    let id = c.owner.id(1, y);
    c.commit_id(&mut accuser, id, 1, y)?;
    c.advance();
    c.reveal_reports(&mut accuser)?;
    let mut baseline = c.clone();
    c.appeal(1)?;
    baseline.baseline_appeal(1)?;
    let a = c.ledger.receipts().last().expect("appeal receipt");
    let b = baseline.ledger.receipts().last().expect("appeal receipt");
    Ok(AppealRow {
        n,
        argus_bytes: a.calldata_bytes,
        argus_gas: a.gas_used,
        baseline_bytes: b.calldata_bytes,
        baseline_gas: b.gas_used,
        gas_ratio: b.gas_used as f64 / a.gas_used as f64,
    })
}

fn latency_row(n: u32, payload: usize, rng: &mut ChaCha20Rng) -> anyhow::Result<LatencyRow> {
    let data: Vec<Vec<u8>> = (0..n).map(|_| (0..payload).map(|_| rng.gen()).collect()).collect();
    let owner = KeyPair::<SecureGroup>::generate(rng);
    let licensee = KeyPair::<SecureGroup>::generate(rng);
    let t = Instant::now();
    let (params, mut secret) = initialize(n, &owner, rng)?;
    let owner_init_ms = ms(t);
    let rec = OtRecord::choose(&params, rng.gen_range(1..=n), rng)?;
    let ev = generate_evidence(&params, &mut secret, &rec, &licensee, &owner)?;
    let t = Instant::now();
    let e = transfer(&params, &secret, &ev, licensee.public(), owner.public(), &data)?;
    let owner_transfer_ms = ms(t);
    let t = Instant::now();
    receive(&e, &rec, &params.a_s)?;
    Ok(LatencyRow { n, owner_init_ms, owner_transfer_ms, licensee_receive_ms: ms(t) })
}

fn caching_rows(reports: u32, seed: u64) -> anyhow::Result<Vec<CachingRow>> {
    [CacheMode::Off, CacheMode::Layers]
        .into_iter()
        .map(|cache| {
            let config = CampaignConfig {
                licensees: 4,
                versions: 1024,
                periods: reports.div_ceil(5) + 2,
                asset_len: 256,
                cache,
                ..Default::default()
            };
            let mut c = Campaign::<SecureGroup>::initiate(config, seed)?;
            c.share(1, None)?;
            let copy = c.licensees[0].copy.clone().expect("shared");
            let mut crowd: Vec<InformerActor> =
                (0..reports).map(|k| InformerActor::new(&format!("informer-{k}"))).collect();
            for batch in crowd.chunks_mut(5) {
                for i in batch.iter_mut() {
                    c.commit_report(i, &copy)?;
                }
                c.advance();
                for i in batch.iter_mut() {
                    c.reveal_reports(i)?;
                }
            }
            let report_gas =
                c.ledger.receipts().iter().filter(|r| r.call == "verify_report").map(|r| r.gas_used).sum();
            let stats = c.contract().path_stats();
            Ok(CachingRow { reports, cache, hash_ops: stats.hash_ops, path_bytes: stats.path_bytes, report_gas })
        })
        .collect()
}

fn bandwidth_row(n: u32, payload: usize, rng: &mut ChaCha20Rng) -> anyhow::Result<BandwidthRow> {
    let payloads: Vec<Vec<u8>> = (0..n).map(|_| (0..payload).map(|_| rng.gen()).collect()).collect();
    let owner = KeyPair::<SecureGroup>::generate(rng);
    let licensee = KeyPair::<SecureGroup>::generate(rng);
    let (params, mut secret) = initialize(n, &owner, rng)?;
    let catalog = Catalog::prepare(&payloads, rng)?;
    let rec = OtRecord::choose(&params, rng.gen_range(1..=n), rng)?;
    let ev = generate_evidence(&params, &mut secret, &rec, &licensee, &owner)?;
    let shared = hybrid_share(&params, &secret, &ev, licensee.public(), owner.public(), &rec, &catalog, rng)?;
    Ok(BandwidthRow {
        n,
        payload,
        hybrid_received: shared.bandwidth.total(Party::Licensee, Direction::Received),
        direct: direct_transfer_bytes(&payloads),
        bound: 3 * (payload as u64 + n as u64 * SecureGroup::POINT_LEN as u64),
    })
}

pub fn run(dimension: Dimension, sweep: &[u32], payload: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    if sweep.iter().any(|&n| n < 2 && dimension != Dimension::Caching) || sweep.contains(&0) {
        return Err(config_error("sweep values must be at least 2 (at least 1 for caching)"));
    }
    if payload == 0 {
        return Err(config_error("--payload must be positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let file = dimension.file();
    match dimension {
        Dimension::AppealSize => {
            let rows = sweep.iter().map(|&n| appeal_row(n, seed)).collect::<anyhow::Result<Vec<_>>>()?;
            write_csv(out, file, &rows)
        }
        Dimension::OtLatency => {
            let rows = sweep.iter().map(|&n| latency_row(n, payload, &mut rng)).collect::<anyhow::Result<Vec<_>>>()?;
            write_csv(out, file, &rows)
        }
        Dimension::Caching => {
            let mut rows = Vec::new();
            for &r in sweep {
                rows.extend(caching_rows(r, seed)?);
            }
            write_csv(out, file, &rows)
        }
        Dimension::Bandwidth => {
            let rows =
                sweep.iter().map(|&n| bandwidth_row(n, payload, &mut rng)).collect::<anyhow::Result<Vec<_>>>()?;
            write_csv(out, file, &rows)
        }
    }
}
