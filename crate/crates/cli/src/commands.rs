//! Campaign stages (`init`, `trade`, `report`, `appeal`) and scenario runs.
//! Each stage replays the earlier ones from the config and seed.

use std::path::Path;

use anyhow::{bail, Context};
use argus_core::actors::{run_game, Campaign, CampaignConfig, GameReport, InformerActor, LicenseeBandwidth};
use argus_core::contract::Status;
use argus_core::crypto::Group;
use argus_core::ledger::ReceiptRow;
use argus_core::pir::{Direction, Party};
use argus_core::watermark::detect;
use serde::Serialize;

use crate::config::{config_error, ScenarioConfig};
use crate::output::{write_csv, write_json};

#[derive(Serialize)]
struct InitSummary {
    name: String,
    seed: u64,
    licensees: u32,
    versions: u32,
    periods: u32,
    segments: u32,
    tree_depth: usize,
    root: String,
    contract: String,
    owner_state_bytes: usize,
    owner_state_bytes_per_licensee: usize,
    transactions: usize,
    gas: u64,
}

fn receipts<G: Group>(c: &Campaign<G>) -> Vec<ReceiptRow> {
    c.ledger.receipts().iter().map(|r| r.row()).collect()
}

fn licensee_index<G: Group>(c: &Campaign<G>, x: u32) -> anyhow::Result<u32> {
    if x == 0 || x > c.config.licensees {
        return Err(config_error(format!("licensee {x} outside 1..={}", c.config.licensees)));
    }
    Ok(x)
}

pub fn init<G: Group>(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<()> {
    let seed = cfg.seed()?;
    let c = Campaign::<G>::initiate(cfg.campaign()?, seed)?;
    let state = c.owner.persistent_bytes();
    let summary = InitSummary {
        name: cfg.name.clone(),
        seed,
        licensees: c.config.licensees,
        versions: c.config.versions,
        periods: c.config.periods,
        segments: c.segments(),
        tree_depth: c.owner.store.dims().depth(),
        root: c.owner.store.root().to_hex(),
        contract: c.ledger.contract_address().expect("deployed").to_string(),
        owner_state_bytes: state,
        owner_state_bytes_per_licensee: state / c.config.licensees as usize,
        transactions: c.ledger.receipts().len(),
        gas: c.ledger.receipts().iter().map(|r| r.gas_used).sum(),
    };
    write_json(out, "campaign.json", &summary)?;
    write_csv(out, "receipts.csv", &receipts(&c))
}

#[derive(Serialize)]
struct TradeRow {
    licensee: u32,
    /// The licensee's private OT choice; visible here because this is a simulation.
    index: u32,
    detected_id: String,
    matches_owner_map: bool,
    copy_bytes: usize,
    received_bytes: u64,
    sent_bytes: u64,
}

fn shared<G: Group>(cfg: &ScenarioConfig, only: Option<u32>) -> anyhow::Result<(Campaign<G>, Vec<u32>)> {
    let mut c = Campaign::<G>::initiate(cfg.campaign()?, cfg.seed()?)?;
    let who: Vec<u32> = match only {
        Some(x) => vec![licensee_index(&c, x)?],
        None => (1..=c.config.licensees).collect(),
    };
    for &x in &who {
        c.share(x, None)?;
    }
    Ok((c, who))
}

pub fn trade<G: Group>(cfg: &ScenarioConfig, licensee: Option<u32>, out: &Path) -> anyhow::Result<()> {
    let (c, who) = shared::<G>(cfg, licensee)?;
    let mut rows = Vec::new();
    let mut bandwidth = Vec::new();
    for x in who {
        let l = &c.licensees[x as usize - 1];
        let copy = l.copy.as_ref().expect("shared");
        let id = detect(copy, c.segments())?;
        let index = l.record.expect("shared").l;
        rows.push(TradeRow {
            licensee: x,
            index,
            detected_id: id.to_hex(),
            matches_owner_map: c.owner.store.id_map().lookup(&id) == Some((x, index)),
            copy_bytes: copy.len(),
            received_bytes: l.bandwidth.total(Party::Licensee, Direction::Received),
            sent_bytes: l.bandwidth.total(Party::Licensee, Direction::Sent),
        });
        bandwidth.extend(l.bandwidth.rows().into_iter().map(|r| LicenseeBandwidth {
            licensee: x,
            phase: r.phase,
            party: r.party,
            direction: r.direction,
            bytes: r.bytes,
        }));
    }
    write_json(out, "trade.json", &rows)?;
    write_csv(out, "bandwidth.csv", &bandwidth)?;
    write_csv(out, "receipts.csv", &receipts(&c))
}

#[derive(Serialize)]
struct ReportRow {
    informer: String,
    address: String,
    commit_period: u32,
    accepted: bool,
    report_number: u32,
    immediate_paid: u128,
}

pub fn report<G: Group>(cfg: &ScenarioConfig, licensee: u32, informers: u32, out: &Path) -> anyhow::Result<()> {
    if informers == 0 {
        return Err(config_error("--informers must be at least 1"));
    }
    let (mut c, _) = shared::<G>(cfg, Some(licensee))?;
    let copy = c.licensees[licensee as usize - 1].copy.clone().expect("shared");
    let mut crowd: Vec<InformerActor> = (1..=informers).map(|i| InformerActor::new(&format!("informer-{i}"))).collect();
    for i in crowd.iter_mut() {
        if !c.commit_report(i, &copy)? {
            bail!("leaked copy of licensee {licensee} was not recognized");
        }
    }
    c.advance();
    let mut rows = Vec::new();
    for i in crowd.iter_mut() {
        for (p, accepted) in c.reveal_reports(i)? {
            rows.push(ReportRow {
                informer: i.label.clone(),
                address: i.address.to_string(),
                commit_period: p.period,
                accepted,
                report_number: c.contract().record(licensee).expect("exists").report_number,
                immediate_paid: c.ledger.balance(&i.address),
            });
        }
    }
    write_json(out, "report.json", &rows)?;
    write_csv(out, "receipts.csv", &receipts(&c))
}

#[derive(Serialize)]
struct AppealSummary {
    licensee: u32,
    accused_version: u32,
    status: Status,
    calldata_bytes: usize,
    gas: u64,
    baseline: Option<BaselineCost>,
}

#[derive(Serialize)]
struct BaselineCost {
    calldata_bytes: usize,
    gas: u64,
    accepted: bool,
}

/// A false accusation of `licensee` under a version it did not choose,
/// answered by an appeal.
pub fn appeal<G: Group>(cfg: &ScenarioConfig, licensee: u32, baseline: bool, out: &Path) -> anyhow::Result<()> {
    let mut cfg = cfg.clone();
    cfg.baseline_appeal |= baseline;
    let (mut c, _) = shared::<G>(&cfg, Some(licensee))?;
    let n = c.config.versions;
    let l = c.licensees[licensee as usize - 1].record.expect("shared").l;
    let y = l % n + 1;
    let mut accuser = InformerActor::new("accuser");
    let id = c.owner.id(licensee, y);
    c.commit_id(&mut accuser, id, licensee, y)?;
    c.advance();
    c.reveal_reports(&mut accuser)?;
    let mut alt = baseline.then(|| c.clone());
    c.appeal(licensee)?;
    let last = c.ledger.receipts().last().expect("appeal receipt");
    let (calldata_bytes, gas) = (last.calldata_bytes, last.gas_used);
    let baseline = match alt.as_mut() {
        Some(b) => {
            let accepted = b.baseline_appeal(licensee)?;
            let r = b.ledger.receipts().last().expect("appeal receipt");
            Some(BaselineCost { calldata_bytes: r.calldata_bytes, gas: r.gas_used, accepted })
        }
        None => None,
    };
    let summary = AppealSummary { licensee, accused_version: y, status: c.status(licensee), calldata_bytes, gas, baseline };
    write_json(out, "appeal.json", &summary)?;
    write_csv(out, "receipts.csv", &receipts(&c))
}

/// Plays the configured assignment; returns whether every assertion held.
pub fn run<G: Group>(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<bool> {
    let assignment = cfg.assignment.as_ref().ok_or_else(|| config_error("scenario has no [assignment] table"))?;
    let campaign: CampaignConfig = cfg.campaign()?;
    let seed = cfg.seed()?;
    let mut report: GameReport = run_game::<G>(&campaign, assignment, seed, cfg.trials)
        .with_context(|| format!("running scenario {}", cfg.name))?;
    report.name = cfg.name.clone();
    write_json(out, "outcome.json", &report)?;
    write_csv(out, "receipts.csv", &report.outcome.receipts)?;
    write_csv(out, "bandwidth.csv", &report.bandwidth)?;
    for a in &report.assertions {
        println!("{} [{}] {}", if a.passed { "PASS" } else { "FAIL" }, a.party, a.check);
    }
    for n in &report.notes {
        println!("NOTE {n}");
    }
    Ok(report.passed())
}
