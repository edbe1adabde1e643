use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use argus_core::actors::{Assignment, CampaignConfig};
use argus_core::contract::{CacheMode, PListMode};
use argus_core::ledger::GasSchedule;
use argus_core::watermark::ID_LEN;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

/// A configuration problem; the binary exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Order-101 group; fast, insecure.
    Tiny,
    /// Ristretto255.
    #[default]
    Secure,
}

/// One campaign, as read from a TOML scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: Option<u64>,
    pub backend: Option<Backend>,
    /// Security parameter in bits; fixed by the id length.
    pub lambda: u32,
    pub licensees: u32,
    pub versions: u32,
    pub periods: u32,
    pub timeout: u32,
    /// Bounty ceiling `c`, deposited per licensee. TOML integers stop at i64.
    pub bounty: u64,
    pub guarantee_len: usize,
    /// Asset file; relative paths resolve against the scenario file.
    pub asset: Option<PathBuf>,
    pub asset_len: usize,
    pub cache: CacheMode,
    pub plist_mode: PListMode,
    pub baseline_appeal: bool,
    pub point_batch: usize,
    pub trials: u32,
    pub gas: GasSchedule,
    pub assignment: Option<Assignment>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let c = CampaignConfig::default();
        Self {
            name: "campaign".into(),
            seed: None,
            backend: None,
            lambda: 128,
            licensees: c.licensees,
            versions: 10_000,
            periods: 1000,
            timeout: c.timeout,
            bounty: u64::try_from(c.bounty).expect("default bounty fits"),
            guarantee_len: c.guarantee_len,
            asset: None,
            asset_len: c.asset_len,
            cache: c.cache,
            plist_mode: c.plist_mode,
            baseline_appeal: c.baseline_appeal,
            point_batch: c.point_batch,
            trials: 1,
            gas: c.gas,
            assignment: None,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| config_error(format!("{}: {}", path.display(), e.message())))?;
        if let (Some(asset), Some(dir)) = (&cfg.asset, path.parent()) {
            if asset.is_relative() {
                cfg.asset = Some(dir.join(asset));
            }
        }
        Ok(cfg)
    }

    pub fn load_gas(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.gas = toml::from_str(&text).map_err(|e| config_error(format!("{}: {}", path.display(), e.message())))?;
        Ok(())
    }

    pub fn seed(&self) -> anyhow::Result<u64> {
        self.seed.ok_or_else(|| config_error("a seed is required: set `seed` in the config or pass --seed"))
    }

    /// Checks everything that does not need the asset bytes.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.lambda != 8 * ID_LEN as u32 {
            return Err(config_error(format!("lambda must be {} (the id length)", 8 * ID_LEN)));
        }
        if self.trials == 0 {
            return Err(config_error("trials must be positive"));
        }
        if let Some(a) = &self.assignment {
            if a.licensees.len() != self.licensees as usize {
                return Err(config_error(format!(
                    "assignment lists {} licensees but the campaign has {}",
                    a.licensees.len(),
                    self.licensees
                )));
            }
        }
        self.campaign_shape().validate().map_err(|e| config_error(e.to_string()))?;
        Ok(())
    }

    fn campaign_shape(&self) -> CampaignConfig {
        CampaignConfig {
            licensees: self.licensees,
            versions: self.versions,
            periods: self.periods,
            timeout: self.timeout,
            bounty: self.bounty.into(),
            guarantee_len: self.guarantee_len,
            asset_len: self.asset_len,
            asset: None,
            cache: self.cache,
            plist_mode: self.plist_mode,
            baseline_appeal: self.baseline_appeal,
            point_batch: self.point_batch,
            gas: self.gas,
        }
    }

    /// The core campaign configuration, with the asset loaded.
    pub fn campaign(&self) -> anyhow::Result<CampaignConfig> {
        self.validate()?;
        let mut c = self.campaign_shape();
        if let Some(path) = &self.asset {
            c.asset = Some(std::fs::read(path).with_context(|| format!("reading asset {}", path.display()))?);
            c.validate().map_err(|e| config_error(e.to_string()))?;
        }
        Ok(c)
    }
}
