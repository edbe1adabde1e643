use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scenario(name: &str) -> PathBuf {
    manifest_dir().join("scenarios").join(name)
}

fn argus(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> TempDir {
    let dir = TempDir::new().unwrap();
    let o = argus(args, dir.path());
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Compares against `tests/golden/<case>/<file>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(case: &str, dir: &Path, files: &[&str]) {
    let root = manifest_dir().join("tests/golden").join(case);
    for f in files {
        let actual = read(dir, f);
        let path = root.join(f);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            fs::create_dir_all(&root).unwrap();
            fs::write(&path, &actual).unwrap();
            continue;
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert!(actual == expected, "{case}/{f} differs from golden; rerun with UPDATE_GOLDEN=1 if intended");
    }
}

const RUN_FILES: [&str; 3] = ["outcome.json", "receipts.csv", "bandwidth.csv"];

#[test]
fn campaign_scenario_matches_golden() {
    let cfg = scenario("bsa-campaign.toml");
    let dir = ok(&["run", "--config", cfg.to_str().unwrap()]);
    golden("bsa-campaign", dir.path(), &RUN_FILES);
}

#[test]
fn false_accuser_scenario_matches_golden() {
    let cfg = scenario("false-accuser.toml");
    let dir = ok(&["run", "--config", cfg.to_str().unwrap()]);
    golden("false-accuser", dir.path(), &RUN_FILES);
}

#[test]
fn same_seed_same_bytes() {
    let cfg = scenario("bsa-campaign.toml");
    let args = ["run", "--config", cfg.to_str().unwrap(), "--seed", "99", "--backend", "tiny"];
    let (a, b) = (ok(&args), ok(&args));
    for f in RUN_FILES {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let c = ok(&["run", "--config", cfg.to_str().unwrap(), "--seed", "100", "--backend", "tiny"]);
    assert_ne!(read(a.path(), "receipts.csv"), read(c.path(), "receipts.csv"));
}

#[test]
fn outcome_reports_every_assertion() {
    let cfg = scenario("bsa-campaign.toml");
    let dir = ok(&["run", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "outcome.json")).unwrap();
    let assertions = v["assertions"].as_array().unwrap();
    assert!(assertions.len() >= 10);
    assert!(assertions.iter().all(|a| a["passed"] == true));
    assert_eq!(v["outcome"]["statuses"], serde_json::json!(["GUILTY", "NORMAL", "GUILTY"]));
    let header = read(dir.path(), "receipts.csv").lines().next().unwrap().to_owned();
    assert_eq!(header, "tx,caller,period,call,gas,bytes,status,events");
    let header = read(dir.path(), "bandwidth.csv").lines().next().unwrap().to_owned();
    assert_eq!(header, "licensee,phase,party,direction,bytes");
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("bad.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn bad_configs_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        "versionz = 3\nseed = 1",
        "seed = 1\nversions = 1",
        "seed = 1\nlambda = 64",
        "versions = 8\nperiods = 4\nlicensees = 2", // no seed
        "seed = 1\nversions = 8\nperiods = 4\nlicensees = 2\n[assignment]\nlicensees = [\"HONEST\"]",
        "seed = [",
    ];
    for text in cases {
        let cfg = write_config(tmp.path(), text);
        let o = argus(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(2), "{text:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = argus(&["init"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "missing --config");
    let o = argus(&["bogus-subcommand"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = scenario("bsa-campaign.toml");
    let o = argus(&["trade", "--config", cfg.to_str().unwrap(), "--licensee", "9"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_asset_is_an_io_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "seed = 1\nversions = 8\nperiods = 4\nasset = \"nowhere.bin\"");
    let o = argus(&["init", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gas_schedule_override_changes_costs() {
    let tmp = TempDir::new().unwrap();
    let gas = tmp.path().join("gas.toml");
    fs::write(&gas, "base_tx = 1").unwrap();
    let cfg = scenario("bsa-campaign.toml");
    let a = ok(&["init", "--config", cfg.to_str().unwrap()]);
    let b = ok(&["init", "--config", cfg.to_str().unwrap(), "--gas-schedule", gas.to_str().unwrap()]);
    let gas_of = |d: &Path| {
        let v: serde_json::Value = serde_json::from_str(&read(d, "campaign.json")).unwrap();
        v["gas"].as_u64().unwrap()
    };
    assert!(gas_of(b.path()) < gas_of(a.path()));
    fs::write(&gas, "no_such_cost = 1").unwrap();
    let o = argus(&["init", "--config", cfg.to_str().unwrap(), "--gas-schedule", gas.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

fn curve(dir: &Path) -> Vec<(String, usize, String, f64)> {
    let mut r = csv::Reader::from_path(dir.join("reward-curve.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["model", "i", "n", "reward"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_owned(), rec[1].parse().unwrap(), rec[2].to_owned(), rec[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn reward_curve_rows() {
    let dir = ok(&["reward-curve", "--n", "5,20"]);
    let rows = curve(dir.path());
    let get = |m: &str, i: usize, n: &str| rows.iter().find(|r| r.0 == m && r.1 == i && r.2 == n).unwrap().3;
    // Float oracle at c = 1e6, guarantee_len = 20.
    assert!((get("argus", 1, "20") - 99_999.90).abs() < 0.01);
    assert!((get("argus", 5, "20") - 6_249.90).abs() < 0.01);
    for i in 1..=20 {
        assert_eq!(get("legacy", i, "20"), get("legacy", 1, "20"));
        assert_eq!(get("legacy", i, "inf"), 0.0);
    }
    // Immediate part depends on i only, deferred part on n only.
    for n in ["5", "20"] {
        for i in 1..n.parse().unwrap() {
            let gap = get("argus", i, n) - get("argus", i + 1, n);
            let inf_gap = get("argus", i, "inf") - get("argus", i + 1, "inf");
            assert!((gap - inf_gap).abs() < 1e-3, "i={i} n={n}");
        }
    }
    // At n = inf only the immediate part remains, and it still decreases.
    for i in 1..20 {
        assert!(get("argus", i, "inf") > get("argus", i + 1, "inf"));
    }
    assert_eq!(rows.iter().filter(|r| r.2 == "5").count(), 10);
    golden("reward-curve", dir.path(), &["reward-curve.csv"]);
}

#[test]
fn bench_appeal_size_is_constant() {
    let dir = ok(&["bench", "--dimension", "appeal-size", "--sweep", "10,100"]);
    let mut r = csv::Reader::from_path(dir.path().join("bench-appeal-size.csv")).unwrap();
    let rows: Vec<Vec<String>> = r.records().map(|x| x.unwrap().iter().map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], rows[1][1], "appeal calldata independent of N");
    let base: Vec<u64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(base[1] > base[0]);
}

#[test]
fn bench_other_dimensions_write_csv() {
    for (dim, sweep, header) in [
        ("ot-latency", "4,8", "n,owner_init_ms,owner_transfer_ms,licensee_receive_ms"),
        ("caching", "5", "reports,cache,hash_ops,path_bytes,report_gas"),
        ("bandwidth", "16,64", "n,payload,hybrid_received,direct,bound"),
    ] {
        let dir = ok(&["bench", "--dimension", dim, "--sweep", sweep, "--payload", "256"]);
        let text = read(dir.path(), &format!("bench-{dim}.csv"));
        assert_eq!(text.lines().next().unwrap(), header);
        assert!(text.lines().count() >= 3, "{dim}");
    }
}

#[test]
fn staged_commands() {
    let cfg = scenario("bsa-campaign.toml");
    let cfg = cfg.to_str().unwrap();

    let d = ok(&["init", "--config", cfg]);
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "campaign.json")).unwrap();
    assert_eq!(v["licensees"], 3);
    assert_eq!(v["root"].as_str().unwrap().len(), 64);

    let d = ok(&["trade", "--config", cfg]);
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "trade.json")).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v.as_array().unwrap().iter().all(|r| r["matches_owner_map"] == true));

    let d = ok(&["report", "--config", cfg, "--licensee", "2", "--informers", "3"]);
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "report.json")).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.iter().map(|r| r["report_number"].as_u64().unwrap()).collect::<Vec<_>>(), [1, 2, 3]);
    let paid: Vec<u64> = rows.iter().map(|r| r["immediate_paid"].as_u64().unwrap()).collect();
    assert!(paid[0] > paid[1] && paid[1] > paid[2]);

    let d = ok(&["appeal", "--config", cfg, "--baseline", "--backend", "tiny"]);
    let v: serde_json::Value = serde_json::from_str(&read(d.path(), "appeal.json")).unwrap();
    assert_eq!(v["status"], "EXONERATED");
    assert!(v["baseline"]["calldata_bytes"].as_u64().unwrap() > v["calldata_bytes"].as_u64().unwrap());
}

#[test]
fn bench_caching_saves_hash_ops() {
    let dir = ok(&["bench", "--dimension", "caching", "--sweep", "50"]);
    let mut r = csv::Reader::from_path(dir.path().join("bench-caching.csv")).unwrap();
    let ops: Vec<(String, u64)> = r.records().map(|x| x.unwrap()).map(|x| (x[1].to_owned(), x[2].parse().unwrap())).collect();
    assert_eq!(ops[0].0, "off");
    assert_eq!(ops[1].0, "layers");
    assert!(ops[1].1 * 10 <= ops[0].1 * 8, "{ops:?}");
}
