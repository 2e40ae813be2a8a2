use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use epsdd_core::market_data::{ColumnMap, SessionSpec};
use epsdd_core::powerlaw::{CandidatePolicy, Distance, ScanConfig};
use epsdd_core::tail_dependence::DEFAULT_GRID;
use epsdd_core::{EpsilonConfig, EpsilonMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run needs, read from a TOML file and adjusted by flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub bars: BarsSettings,
    #[serde(default)]
    pub events: EventSettings,
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub tests: TestSettings,
    #[serde(default)]
    pub taildep: TailDepSettings,
    #[serde(default)]
    pub nullsim: NullSimSettings,
    #[serde(default)]
    pub contracts: Vec<ContractConfig>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarsSettings {
    pub dt: u32,
}

impl Default for BarsSettings {
    fn default() -> Self {
        Self { dt: 30 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventSettings {
    pub eps0: f64,
    pub mode: EpsilonMode,
}

impl Default for EventSettings {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            mode: EpsilonMode::Adaptive,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub n_min: usize,
    /// Size of the quantile grid of candidate lower bounds; every distinct
    /// value is tried when absent.
    pub grid: Option<usize>,
    pub distance: Distance,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            n_min: 100,
            grid: None,
            distance: Distance::Ks,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSettings {
    pub p0: f64,
    pub tail_size: usize,
    pub r_max: usize,
    /// Rank for the U-test; chosen automatically when absent.
    pub u_rank: Option<usize>,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            p0: 0.1,
            tail_size: 200,
            r_max: 30,
            u_rank: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailDepSettings {
    pub grid: Vec<f64>,
}

impl Default for TailDepSettings {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullSimSettings {
    pub replications: u32,
}

impl Default for NullSimSettings {
    fn default() -> Self {
        Self { replications: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub label: String,
    /// Tick files in maturity order; consecutive files are joined at `rolls`.
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub rolls: Vec<NaiveDate>,
    pub session: SessionSpec,
    #[serde(default)]
    pub columns: ColumnMap,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: None,
            workers: 1,
            bars: Default::default(),
            events: Default::default(),
            scan: Default::default(),
            tests: Default::default(),
            taildep: Default::default(),
            nullsim: Default::default(),
            contracts: Vec::new(),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub dt: Option<u32>,
    pub eps0: Option<f64>,
    pub p0: Option<f64>,
}

impl RunConfig {
    /// Parse a config file; relative tick paths are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for c in &mut cfg.contracts {
            for f in &mut c.files {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        if let Some(out) = &cfg.out {
            if out.is_relative() {
                cfg.out = Some(base.join(out));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.dt {
            self.bars.dt = v;
        }
        if let Some(v) = o.eps0 {
            self.events.eps0 = v;
        }
        if let Some(v) = o.p0 {
            self.tests.p0 = v;
        }
    }

    /// Settings checks that do not touch the file system.
    pub fn validate(&self) -> Result<()> {
        if self.bars.dt == 0 {
            bail!("bar width dt must be positive");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        self.epsilon().validate()?;
        self.scan_config().validate()?;
        if !(self.tests.p0 > 0.0 && self.tests.p0 < 1.0) {
            bail!("p0 must lie in (0, 1), got {}", self.tests.p0);
        }
        let mut labels: Vec<&str> = self.contracts.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            bail!("contract label `{}` appears twice", w[0]);
        }
        for c in &self.contracts {
            if c.files.is_empty() {
                bail!("contract `{}` lists no tick files", c.label);
            }
            if c.rolls.len() + 1 != c.files.len() {
                bail!(
                    "contract `{}` has {} files and {} roll dates; expected {}",
                    c.label,
                    c.files.len(),
                    c.rolls.len(),
                    c.files.len() - 1
                );
            }
            c.session.validate()?;
        }
        Ok(())
    }

    /// First referenced tick file that does not exist.
    pub fn missing_input(&self) -> Option<&Path> {
        self.contracts
            .iter()
            .flat_map(|c| c.files.iter())
            .find(|f| !f.is_file())
            .map(|p| p.as_path())
    }

    /// Contracts ordered by label, which fixes output order.
    pub fn sorted_contracts(&self) -> Vec<&ContractConfig> {
        let mut v: Vec<&ContractConfig> = self.contracts.iter().collect();
        v.sort_by(|a, b| a.label.cmp(&b.label));
        v
    }

    pub fn epsilon(&self) -> EpsilonConfig {
        EpsilonConfig {
            bar_width_secs: self.bars.dt,
            epsilon0: self.events.eps0,
            mode: self.events.mode,
        }
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            n_min: self.scan.n_min,
            candidates: match self.scan.grid {
                Some(g) => CandidatePolicy::QuantileGrid(g),
                None => CandidatePolicy::AllUnique,
            },
        }
    }

    /// SHA-256 of the analysis-relevant settings. The output directory and
    /// worker count do not change results and are left out, so reruns into
    /// another directory carry the same hash.
    pub fn hash(&self) -> String {
        let mut view = self.clone();
        view.out = None;
        view.workers = 0;
        let bytes = serde_json::to_vec(&view).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
[bars]
dt = 60
[[contracts]]
label = "ES"
files = ["es_h.csv", "es_m.csv"]
rolls = ["2010-03-11"]
session = { ath_start = "08:30", ath_end = "15:15", timezone_label = "US/Central" }
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let dir = std::env::temp_dir().join("epsdd-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, SAMPLE).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.bars.dt, 60);
        assert_eq!(cfg.tests.r_max, 30);
        assert_eq!(cfg.contracts[0].files[0], dir.join("es_h.csv"));
        assert_eq!(cfg.contracts[0].session.max_gap_secs, 300);
        cfg.validate().unwrap();
        assert_eq!(cfg.missing_input(), Some(dir.join("es_h.csv").as_path()));
    }

    #[test]
    fn overrides_and_hash() {
        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        let h = cfg.hash();
        cfg.apply(&Overrides {
            out: Some("elsewhere".into()),
            workers: Some(4),
            ..Default::default()
        });
        assert_eq!(cfg.hash(), h);
        cfg.apply(&Overrides {
            eps0: Some(2.0),
            ..Default::default()
        });
        assert_ne!(cfg.hash(), h);
        assert_eq!(cfg.epsilon().epsilon0, 2.0);
    }

    #[test]
    fn partial_tables_keep_defaults() {
        let cfg: RunConfig = toml::from_str("[scan]\nn_min = 20\n[tests]\np0 = 0.05\n").unwrap();
        assert_eq!(cfg.scan.n_min, 20);
        assert_eq!(cfg.scan.distance, Distance::Ks);
        assert_eq!(cfg.tests.tail_size, 200);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut cfg: RunConfig = toml::from_str(SAMPLE).unwrap();
        cfg.contracts[0].rolls.clear();
        assert!(cfg.validate().is_err());
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
        let mut cfg = RunConfig::default();
        cfg.tests.p0 = 1.5;
        assert!(cfg.validate().is_err());
    }
}
