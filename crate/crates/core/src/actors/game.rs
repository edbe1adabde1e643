//! Scripted strategies and the case matrix of the security game.
//!
//! Every game follows the same clock: shares and commitments in period 1,
//! reveals, replays and appeals in period 2, late replays in period 3,
//! `set_guilty` once the timeout has passed, and bounty claims at period `K`.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Campaign, CampaignConfig, InformerActor, Outcome};
use crate::contract::{report_commitment, ArgusContract, Call, Status};
use crate::crypto::{Digest, Group};
use crate::ledger::Address;
use crate::merkle::MerklePath;
use crate::pir::{Direction, Party, Phase};
use crate::watermark::WatermarkId;
use crate::incentive::{floor_units, units};
use crate::{Error, ExactSchedule, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OwnerStrategy {
    #[default]
    Honest,
    /// Reports the target under a random version from a fresh address.
    FalseAccuser,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LicenseeStrategy {
    #[default]
    Honest,
    /// Publishes its copy and stays quiet when accused.
    Leaker,
    /// Publishes its copy, then appeals with its real record and with a
    /// forged opening.
    GuiltyAppealer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InformerStrategy {
    #[default]
    Honest,
    /// Reports each leaked copy under `k` identities.
    Sybil(u32),
    /// Copies other informers' reveals from the ledger.
    Replayer,
    /// Commits to a random id against the target.
    Guesser,
    /// Sees the leak and reports nothing.
    Silent,
}

impl LicenseeStrategy {
    pub fn leaks(self) -> bool {
        !matches!(self, LicenseeStrategy::Honest)
    }
}

impl InformerStrategy {
    fn reports_leaks(self) -> bool {
        matches!(self, InformerStrategy::Honest | InformerStrategy::Sybil(_))
    }

    fn identities(self) -> u32 {
        match self {
            InformerStrategy::Sybil(k) => k,
            _ => 1,
        }
    }
}

/// One strategy per actor. Licensee `x` is `licensees[x - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    #[serde(default)]
    pub owner: OwnerStrategy,
    pub licensees: Vec<LicenseeStrategy>,
    #[serde(default)]
    pub informers: Vec<InformerStrategy>,
    /// Licensee attacked by a false accuser or guessers.
    #[serde(default = "default_target")]
    pub target: u32,
}

fn default_target() -> u32 {
    1
}

impl Assignment {
    fn check(&self) -> Result<()> {
        if self.licensees.is_empty() {
            return Err(Error::Config("assignment needs at least one licensee".into()));
        }
        if self.target == 0 || self.target as usize > self.licensees.len() {
            return Err(Error::Config(format!("target {} is not a licensee", self.target)));
        }
        if self.informers.iter().any(|s| s.identities() == 0) {
            return Err(Error::Config("a Sybil informer needs at least one identity".into()));
        }
        Ok(())
    }
}

/// Whose interest a scenario protects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposition {
    HonestOwner,
    HonestLicensee,
    HonestInformer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub proposition: Proposition,
    pub assignment: Assignment,
    /// Games to play; above 1 the licensee check becomes a frequency bound.
    #[serde(default = "default_trials")]
    pub trials: u32,
}

fn default_trials() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assertion {
    pub party: String,
    pub check: String,
    pub passed: bool,
}

impl Assertion {
    fn new(party: impl Into<String>, check: impl Into<String>, passed: bool) -> Self {
        Self { party: party.into(), check: check.into(), passed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InformerView {
    pub label: String,
    pub strategy: InformerStrategy,
    pub addresses: Vec<Address>,
    pub accepted: u32,
    pub rejected: u32,
    pub paid: u128,
}

/// One bandwidth counter of one licensee's share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LicenseeBandwidth {
    pub licensee: u32,
    pub phase: Phase,
    pub party: Party,
    pub direction: Direction,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameReport {
    pub name: String,
    pub seed: u64,
    pub trials: u32,
    pub assertions: Vec<Assertion>,
    /// Outcome of the first game.
    pub outcome: Outcome,
    pub informers: Vec<InformerView>,
    pub bandwidth: Vec<LicenseeBandwidth>,
    /// Games in which some honest licensee ended guilty.
    pub honest_guilty: u32,
    /// Observations recorded without an assertion.
    pub notes: Vec<String>,
}

impl GameReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Raw trace of one game.
struct Played {
    outcome: Outcome,
    replayed: Outcome,
    balances_match: bool,
    versions: Vec<u32>,
    informers: Vec<InformerView>,
    /// Version each licensee was accused under, if any.
    accused_as: Vec<Option<u32>>,
    /// Bounty each informer is owed under the schedule for its accepted reveals.
    due: Vec<u128>,
    bandwidth: Vec<LicenseeBandwidth>,
}

fn play<G: Group>(config: &CampaignConfig, a: &Assignment, seed: u64) -> Result<Played> {
    a.check()?;
    let mut config = config.clone();
    config.licensees = a.licensees.len() as u32;
    let mut c = Campaign::<G>::initiate(config, seed)?;
    let n = c.config.versions;
    let m = c.config.licensees;

    let versions: Vec<u32> = (1..=m).map(|x| c.share(x, None)).collect::<Result<_>>()?;
    let leaked: Vec<Vec<u8>> = a
        .licensees
        .iter()
        .zip(&c.licensees)
        .filter(|(s, _)| s.leaks())
        .map(|(_, l)| l.copy.clone().expect("shared"))
        .collect();

    let mut crowd: Vec<Vec<InformerActor>> = a
        .informers
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            InformerStrategy::Sybil(k) => {
                (1..=*k).map(|j| InformerActor::new(&format!("informer-{}-sybil-{j}", i + 1))).collect()
            }
            _ => vec![InformerActor::new(&format!("informer-{}", i + 1))],
        })
        .collect();
    let mut proxy = InformerActor::new("owner-proxy");

    // Period 1: commitments.
    if a.owner == OwnerStrategy::FalseAccuser {
        let y = c.rng().gen_range(1..=n);
        let id = c.owner.id(a.target, y);
        c.commit_id(&mut proxy, id, a.target, y)?;
    }
    for (s, actors) in a.informers.iter().zip(crowd.iter_mut()) {
        for actor in actors.iter_mut() {
            if s.reports_leaks() {
                for copy in &leaked {
                    c.commit_report(actor, copy)?;
                }
            } else if *s == InformerStrategy::Guesser {
                let id = WatermarkId::random(c.rng());
                let y = c.rng().gen_range(1..=n);
                c.commit_id(actor, id, a.target, y)?;
            }
        }
    }

    // Period 2: reveals, then replays of whatever was accepted.
    c.advance();
    let mut accepted = Vec::new();
    let mut tallies = vec![(0u32, 0u32); a.informers.len()];
    c.reveal_reports(&mut proxy)?;
    for (i, actors) in crowd.iter_mut().enumerate() {
        for actor in actors.iter_mut() {
            for (p, ok) in c.reveal_reports(actor)? {
                if ok {
                    tallies[i].0 += 1;
                    let number = c.contract().record(p.x).expect("exists").report_number;
                    accepted.push((i, p.x, number));
                } else {
                    tallies[i].1 += 1;
                }
            }
        }
    }
    let seen: Vec<(Digest, MerklePath, Address)> = c
        .public_reveals()
        .iter()
        .filter(|r| r.accepted)
        .map(|r| (r.rv1, r.path.clone(), r.informer))
        .collect();
    let mut copied: Vec<(usize, Digest, MerklePath)> = Vec::new();
    for (i, s) in a.informers.iter().enumerate() {
        if *s != InformerStrategy::Replayer {
            continue;
        }
        let me = crowd[i][0].address;
        for (rv1, path, author) in &seen {
            // Same period, own address.
            if c.reveal_raw(*rv1, path.clone(), me)? {
                tallies[i].0 += 1;
            } else {
                tallies[i].1 += 1;
            }
            // Fresh commitment now, reveal next period.
            let cm_author = report_commitment(rv1, author);
            let slot = c.contract().commitments(c.time() - 1).find(|(cm, _, _)| *cm == cm_author);
            if let Some((_, x, y)) = slot {
                let cm = report_commitment(rv1, &me);
                c.submit(me, 0, Call::StoreCommitment { cm, x, y })?;
                copied.push((i, *rv1, path.clone()));
            }
        }
    }

    // Accused licensees answer in the period of the reveal.
    for x in 1..=m {
        if c.status(x) != Status::Accused {
            continue;
        }
        match a.licensees[x as usize - 1] {
            LicenseeStrategy::Honest => {
                c.appeal(x)?;
            }
            LicenseeStrategy::Leaker => {}
            LicenseeStrategy::GuiltyAppealer => {
                c.appeal(x)?;
                let leaked_as = c.contract().record(x).and_then(|r| r.version).expect("accused");
                let l = loop {
                    let l = c.rng().gen_range(1..=n);
                    if l != leaked_as {
                        break l;
                    }
                };
                let r = G::random_scalar(c.rng());
                c.appeal_with(x, l, r)?;
            }
        }
    }

    // Period 3: late replays.
    c.advance();
    for (i, rv1, path) in copied {
        let me = crowd[i][0].address;
        if c.reveal_raw(rv1, path, me)? {
            tallies[i].0 += 1;
        } else {
            tallies[i].1 += 1;
        }
    }
    c.confirm_infringers()?;
    c.claim_all()?;

    let outcome = c.outcome();
    let replayed = Outcome::replay(m, c.ledger.receipts());
    let balances_match = outcome.payouts.iter().all(|(addr, p)| c.ledger.balance(addr) == p.total());
    let informers = a
        .informers
        .iter()
        .zip(&crowd)
        .zip(&tallies)
        .enumerate()
        .map(|(i, ((s, actors), t))| {
            let addresses: Vec<Address> = actors.iter().map(|a| a.address).collect();
            InformerView {
                label: format!("informer-{}", i + 1),
                strategy: *s,
                paid: addresses.iter().map(|addr| outcome.paid_to(addr)).sum(),
                addresses,
                accepted: t.0,
                rejected: t.1,
            }
        })
        .collect();
    let accused_as = c.contract().records().iter().map(|r| r.version).collect();
    let due = (0..a.informers.len())
        .map(|i| {
            let reports: Vec<(u32, u32)> = accepted.iter().filter(|r| r.0 == i).map(|&(_, x, n)| (x, n)).collect();
            schedule_payout(c.contract(), &reports, &outcome.report_numbers)
        })
        .collect();
    let bandwidth = c
        .licensees
        .iter()
        .flat_map(|l| {
            l.bandwidth.rows().into_iter().map(move |r| LicenseeBandwidth {
                licensee: l.x,
                phase: r.phase,
                party: r.party,
                direction: r.direction,
                bytes: r.bytes,
            })
        })
        .collect();
    Ok(Played { outcome, replayed, balances_match, versions, informers, accused_as, due, bandwidth })
}

/// Immediate bounties due for `numbers`, plus the deferred share of each
/// distinct licensee at its final count.
fn schedule_payout<G: Group>(c: &ArgusContract<G>, reports: &[(u32, u32)], finals: &[u32]) -> u128 {
    let immediate: u128 = reports.iter().map(|&(_, n)| c.immediate_amount(n)).sum();
    let licensees: BTreeSet<u32> = reports.iter().map(|r| r.0).collect();
    immediate + licensees.iter().map(|&x| c.deferred_amount(finals[x as usize - 1])).sum::<u128>()
}

/// A leaker reporting its own copy first gets part of its deposit back.
/// Whether that counts as over-reporting is left open, so it is only logged.
fn self_report_notes(config: &CampaignConfig, a: &Assignment, o: &Outcome) -> Result<Vec<String>> {
    let schedule = ExactSchedule::geometric(units(config.bounty), config.guarantee_len)?;
    Ok(a.licensees
        .iter()
        .enumerate()
        .filter(|(_, s)| s.leaks())
        .map(|(i, _)| {
            let n = o.report_numbers[i] as usize + 1;
            let back = floor_units(&schedule.immediate(1)) + floor_units(&schedule.deferred(n));
            format!(
                "self-report: leaking licensee {} reporting itself first would recover {back} of its {} deposit (not asserted)",
                i + 1,
                config.bounty
            )
        })
        .collect())
}

fn single_game_assertions<G: Group>(
    config: &CampaignConfig,
    a: &Assignment,
    seed: u64,
    played: &Played,
    notes: &mut Vec<String>,
) -> Result<Vec<Assertion>> {
    let o = &played.outcome;
    let mut out = vec![
        Assertion::new("harness", "outcome replays from the receipt log", played.replayed == *o),
        Assertion::new("harness", "payee balances match bounty events", played.balances_match),
    ];
    if a.owner == OwnerStrategy::Honest {
        let genuine: u32 = a.informers.iter().filter(|s| s.reports_leaks()).map(|s| s.identities()).sum();
        for (i, s) in a.licensees.iter().enumerate() {
            let x = i + 1;
            if s.leaks() && genuine > 0 {
                out.push(Assertion::new("owner", format!("leaking licensee {x} ends guilty"), o.statuses[i] == Status::Guilty));
                out.push(Assertion::new(
                    "owner",
                    format!("licensee {x} report number {} equals genuine reports {genuine}", o.report_numbers[i]),
                    o.report_numbers[i] == genuine,
                ));
            }
            if !s.leaks() {
                out.push(Assertion::new(
                    "owner",
                    format!("pool of non-leaking licensee {x} untouched"),
                    o.report_numbers[i] == 0,
                ));
            }
        }
        for (i, s) in a.informers.iter().enumerate() {
            if let InformerStrategy::Sybil(k) = s {
                if *k > 1 && !played.informers[i].addresses.is_empty() && played.informers[i].accepted > 0 {
                    let mut single = a.clone();
                    single.informers[i] = InformerStrategy::Sybil(1);
                    let alone = play::<G>(config, &single, seed)?;
                    let (split, one) = (played.informers[i].paid, alone.informers[i].paid);
                    let check = format!("informer {} under {k} identities earns {split} < {one} as one", i + 1);
                    // Sybil-proofness covers extra identities reporting after
                    // everyone else; interleaved with later genuine reports the
                    // split can come out ahead.
                    if played.informers[i + 1..].iter().any(|v| v.accepted > 0) {
                        notes.push(format!("{check}: later reports follow, outside the guarantee (not asserted)"));
                    } else {
                        out.push(Assertion::new("owner", check, split < one));
                    }
                }
            }
        }
    }

    for (i, s) in a.licensees.iter().enumerate() {
        if *s != LicenseeStrategy::Honest {
            continue;
        }
        let x = i + 1;
        if a.owner == OwnerStrategy::Honest {
            out.push(Assertion::new("licensee", format!("honest licensee {x} not guilty"), o.statuses[i] != Status::Guilty));
        } else {
            // Against a false accuser, guilt is only possible when the guess
            // lands on the licensee's own version.
            let hit = played.accused_as[i] == Some(played.versions[i]);
            out.push(Assertion::new(
                "licensee",
                format!("honest licensee {x} guilty only if the accuser guessed its version"),
                o.statuses[i] != Status::Guilty || hit,
            ));
        }
    }

    for (i, s) in a.informers.iter().enumerate() {
        let view = &played.informers[i];
        match s {
            InformerStrategy::Honest => {
                let leaks = a.licensees.iter().filter(|s| s.leaks()).count() as u32;
                out.push(Assertion::new(
                    "informer",
                    format!("informer {} had all {leaks} reports accepted", i + 1),
                    view.accepted == leaks && view.rejected == 0,
                ));
                let due = played.due[i];
                out.push(Assertion::new(
                    "informer",
                    format!("informer {} paid {} per schedule {due}", i + 1, view.paid),
                    view.paid == due,
                ));
            }
            InformerStrategy::Replayer | InformerStrategy::Guesser => {
                out.push(Assertion::new(
                    "informer",
                    format!("{s:?} informer {} earns nothing", i + 1),
                    view.accepted == 0 && view.paid == 0,
                ));
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Plays `trials` games from consecutive seeds. A single game returns its
/// assertions; several games add a frequency bound on honest licensees
/// ending guilty, `≤ 1/N + 3σ`.
pub fn run_game<G: Group>(config: &CampaignConfig, a: &Assignment, seed: u64, trials: u32) -> Result<GameReport> {
    let trials = trials.max(1);
    let first = play::<G>(config, a, seed)?;
    let mut notes = Vec::new();
    let mut assertions = single_game_assertions::<G>(config, a, seed, &first, &mut notes)?;
    let honest: Vec<usize> =
        a.licensees.iter().enumerate().filter(|(_, s)| **s == LicenseeStrategy::Honest).map(|(i, _)| i).collect();
    let guilty = |o: &Outcome| honest.iter().any(|&i| o.statuses[i] == Status::Guilty);

    let mut honest_guilty = u32::from(guilty(&first.outcome));
    if trials > 1 {
        let rest: Vec<(bool, bool)> = (1..trials as u64)
            .into_par_iter()
            .map(|t| {
                let s = seed.wrapping_add(t);
                let p = play::<G>(config, a, s)?;
                let ok = p.replayed == p.outcome && p.balances_match;
                Ok((guilty(&p.outcome), ok))
            })
            .collect::<Result<_>>()?;
        honest_guilty += rest.iter().filter(|r| r.0).count() as u32;
        assertions.push(Assertion::new(
            "harness",
            format!("all {trials} games replay from their logs"),
            rest.iter().all(|r| r.1),
        ));
        if !honest.is_empty() {
            let p = 1.0 / config.versions as f64;
            let bound = p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
            let rate = honest_guilty as f64 / trials as f64;
            assertions.push(Assertion::new(
                "licensee",
                format!("guilty rate {rate:.4} <= {bound:.4} over {trials} games"),
                rate <= bound,
            ));
        }
    }
    notes.extend(self_report_notes(config, a, &first.outcome)?);
    Ok(GameReport {
        name: String::new(),
        seed,
        trials,
        assertions,
        outcome: first.outcome,
        informers: first.informers,
        bandwidth: first.bandwidth,
        honest_guilty,
        notes,
    })
}

/// Counts for a false-accuser campaign against honest licensees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    pub trials: u32,
    pub accused: u32,
    pub exonerated: u32,
    pub guilty: u32,
}

/// Plays `trials` games of a false-accusing owner against one honest
/// licensee and tallies the licensee's final status.
pub fn monte_carlo_guilty_rate<G: Group>(config: &CampaignConfig, trials: u32, seed: u64) -> Result<MonteCarlo> {
    let a = Assignment {
        owner: OwnerStrategy::FalseAccuser,
        licensees: vec![LicenseeStrategy::Honest],
        informers: Vec::new(),
        target: 1,
    };
    let statuses: Vec<(Status, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let p = play::<G>(config, &a, seed.wrapping_add(t))?;
            Ok((p.outcome.statuses[0], p.accused_as[0].is_some()))
        })
        .collect::<Result<_>>()?;
    Ok(MonteCarlo {
        trials,
        accused: statuses.iter().filter(|s| s.1).count() as u32,
        exonerated: statuses.iter().filter(|s| s.0 == Status::Exonerated).count() as u32,
        guilty: statuses.iter().filter(|s| s.0 == Status::Guilty).count() as u32,
    })
}

/// The case enumeration: honest owner against eight adversary
/// combinations, honest licensee against three, honest informer against
/// three.
pub fn scenario_matrix() -> Vec<Scenario> {
    use InformerStrategy as I;
    use LicenseeStrategy as L;
    use OwnerStrategy as O;
    let case = |name: &str, proposition, owner, licensees: &[L], informers: &[I], trials| Scenario {
        name: name.to_string(),
        proposition,
        assignment: Assignment { owner, licensees: licensees.to_vec(), informers: informers.to_vec(), target: 1 },
        trials,
    };
    let p1 = Proposition::HonestOwner;
    let p2 = Proposition::HonestLicensee;
    let p3 = Proposition::HonestInformer;
    vec![
        case("owner/leaker-l1", p1, O::Honest, &[L::Leaker, L::Honest], &[I::Honest], 1),
        case("owner/guesser-i1", p1, O::Honest, &[L::Honest, L::Honest], &[I::Guesser], 1),
        case("owner/leaker-l1+sybil-i1", p1, O::Honest, &[L::Leaker, L::Honest], &[I::Sybil(3)], 1),
        case("owner/leaker-l1+silent-i1", p1, O::Honest, &[L::Leaker, L::Honest], &[I::Silent, I::Honest], 1),
        case("owner/leakers-l1-l2", p1, O::Honest, &[L::Leaker, L::Leaker], &[I::Honest], 1),
        case("owner/guessers-i1-i2", p1, O::Honest, &[L::Honest, L::Honest], &[I::Guesser, I::Guesser], 1),
        case("owner/leakers+silent-i1", p1, O::Honest, &[L::Leaker, L::Leaker], &[I::Silent, I::Honest], 1),
        case(
            "owner/leakers+silent-i1-i2",
            p1,
            O::Honest,
            &[L::Leaker, L::Leaker],
            &[I::Silent, I::Silent, I::Honest],
            1,
        ),
        case("licensee/false-accuser", p2, O::FalseAccuser, &[L::Honest, L::Honest], &[], 400),
        case("licensee/leaker-l2+guessers", p2, O::Honest, &[L::Honest, L::Leaker], &[I::Guesser, I::Guesser], 1),
        case(
            "licensee/all-malicious",
            p2,
            O::FalseAccuser,
            &[L::Honest, L::Leaker],
            &[I::Guesser, I::Guesser],
            400,
        ),
        case("informer/guilty-appealer", p3, O::Honest, &[L::GuiltyAppealer, L::Honest], &[I::Honest], 1),
        case("informer/replayer-i2", p3, O::Honest, &[L::Leaker, L::Honest], &[I::Honest, I::Replayer], 1),
        case(
            "informer/guilty-appealer+sybil-i2",
            p3,
            O::Honest,
            &[L::GuiltyAppealer, L::Honest],
            &[I::Honest, I::Sybil(3)],
            1,
        ),
    ]
}

/// Runs one scenario of the matrix.
pub fn run_scenario<G: Group>(config: &CampaignConfig, s: &Scenario, seed: u64) -> Result<GameReport> {
    let mut report = run_game::<G>(config, &s.assignment, seed, s.trials)?;
    report.name = s.name.clone();
    Ok(report)
}

/// Owner-side lookups of `trials` random ids; returns how many hit a
/// committed identity.
pub fn guess_hits<G: Group, R: Rng + rand::CryptoRng>(c: &Campaign<G>, trials: u64, rng: &mut R) -> u64 {
    (0..trials).filter(|_| c.owner.store.id_map().lookup(&WatermarkId::random(rng)).is_some()).count() as u64
}
