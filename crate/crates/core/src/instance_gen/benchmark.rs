use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{derive_seed, generate_instance, grid, sample_environment, ScenarioConfig};
use crate::error::{Error, Result};
use crate::model::{EnvironmentRealization, Instance, SCHEMA_VERSION};
use crate::simulator::Case;

pub const GENERATOR_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

const ENV_SALT: u64 = 0x656e_7673;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub envs_per_instance: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Valid => self.valid,
            Split::Test => self.test,
        }
    }
}

/// Benchmark scale. `Full` is the whole 108-cell grid; `Desk` keeps the nine NT=50
/// cells at 20% cloud with fewer instances so a comparison fits on a workstation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Full,
    Desk,
}

impl Profile {
    pub fn counts(self) -> SplitCounts {
        match self {
            Profile::Full => SplitCounts { train: 100, valid: 20, test: 50, envs_per_instance: 1 },
            Profile::Desk => SplitCounts { train: 20, valid: 10, test: 10, envs_per_instance: 1 },
        }
    }

    /// Mini-batches of five training instances.
    pub fn batches(self) -> usize {
        self.counts().train / 5
    }

    pub fn gphh_seeds(self) -> usize {
        match self {
            Profile::Full => 5,
            Profile::Desk => 3,
        }
    }

    pub fn includes(self, cell: &ScenarioConfig) -> bool {
        match self {
            Profile::Full => true,
            Profile::Desk => cell.nt == 50 && cell.prob_cloud == 0.2,
        }
    }

    pub fn cells(self, master_seed: u64) -> Vec<ScenarioConfig> {
        grid(master_seed).into_iter().filter(|c| self.includes(c)).collect()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Full => "full",
            Profile::Desk => "desk",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Profile::Full),
            "desk" => Ok(Profile::Desk),
            _ => Err(Error::Config(format!("unknown profile '{s}' (expected full or desk)"))),
        }
    }
}

/// Cell selection such as `nt=50,mmc=1024|2048`: comma-separated clauses over the keys
/// `nt`, `st`, `mmc` and `cloud`, each listing accepted values separated by `|`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScenarioFilter {
    clauses: Vec<(FilterKey, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FilterKey {
    Nt,
    St,
    Mmc,
    Cloud,
}

impl FilterKey {
    fn name(self) -> &'static str {
        match self {
            FilterKey::Nt => "nt",
            FilterKey::St => "st",
            FilterKey::Mmc => "mmc",
            FilterKey::Cloud => "cloud",
        }
    }
}

impl ScenarioFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn matches(&self, cell: &ScenarioConfig) -> bool {
        self.clauses.iter().all(|(key, values)| {
            let v = match key {
                FilterKey::Nt => cell.nt as f64,
                FilterKey::St => f64::from(cell.st),
                FilterKey::Mmc => f64::from(cell.mmc),
                FilterKey::Cloud => cell.prob_cloud,
            };
            values.contains(&v)
        })
    }
}

impl FromStr for ScenarioFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut clauses = Vec::new();
        for clause in s.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let (key, values) = clause
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("filter clause '{clause}' lacks '='")))?;
            let key = match key.trim().to_ascii_lowercase().as_str() {
                "nt" => FilterKey::Nt,
                "st" => FilterKey::St,
                "mmc" => FilterKey::Mmc,
                "cloud" => FilterKey::Cloud,
                other => return Err(Error::Config(format!("unknown filter key '{other}'"))),
            };
            let values = values
                .split('|')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad filter value '{v}' for {}", key.name())))
                })
                .collect::<Result<Vec<_>>>()?;
            clauses.push((key, values));
        }
        Ok(Self { clauses })
    }
}

impl TryFrom<String> for ScenarioFilter {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScenarioFilter> for String {
    fn from(f: ScenarioFilter) -> String {
        f.to_string()
    }
}

impl fmt::Display for ScenarioFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|(k, vs)| {
                let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                format!("{}={}", k.name(), vs.join("|"))
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSeeds {
    pub index: usize,
    pub instance_seed: u64,
    pub env_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellManifest {
    #[serde(flatten)]
    pub config: ScenarioConfig,
    pub train: Vec<InstanceSeeds>,
    pub valid: Vec<InstanceSeeds>,
    pub test: Vec<InstanceSeeds>,
}

impl CellManifest {
    pub fn id(&self) -> String {
        self.config.cell_id()
    }

    pub fn split(&self, split: Split) -> &[InstanceSeeds] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }
}

/// Every seed needed to regenerate a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator_version: u32,
    pub schema_version: u32,
    pub master_seed: u64,
    pub profile: Profile,
    pub counts: SplitCounts,
    pub cells: Vec<CellManifest>,
}

impl Manifest {
    pub fn cell(&self, id: &str) -> Option<&CellManifest> {
        self.cells.iter().find(|c| c.id() == id)
    }
}

fn plan_split(cell_seed: u64, split: Split, n: usize, envs: usize) -> Vec<InstanceSeeds> {
    let base = derive_seed(cell_seed, split as u64);
    (0..n)
        .map(|index| {
            let instance_seed = derive_seed(base, index as u64);
            let env_base = instance_seed ^ ENV_SALT;
            InstanceSeeds {
                index,
                instance_seed,
                env_seeds: (0..envs).map(|j| derive_seed(env_base, j as u64)).collect(),
            }
        })
        .collect()
}

/// Seeds for every selected cell; no sampling happens here.
pub fn plan_benchmark(master_seed: u64, profile: Profile, filter: &ScenarioFilter) -> Manifest {
    let counts = profile.counts();
    let cells = profile
        .cells(master_seed)
        .into_iter()
        .filter(|c| filter.matches(c))
        .map(|config| {
            let plan = |s: Split| plan_split(config.seed, s, counts.get(s), counts.envs_per_instance);
            CellManifest {
                config,
                train: plan(Split::Train),
                valid: plan(Split::Valid),
                test: plan(Split::Test),
            }
        })
        .collect();
    Manifest {
        generator_version: GENERATOR_VERSION,
        schema_version: SCHEMA_VERSION,
        master_seed,
        profile,
        counts,
        cells,
    }
}

/// One sampled instance with its environment realizations.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: Arc<Instance>,
    pub envs: Vec<EnvironmentRealization>,
}

impl GeneratedInstance {
    pub fn cases(&self) -> impl Iterator<Item = Case> + '_ {
        self.envs.iter().map(|env| Case {
            instance: Arc::clone(&self.instance),
            env: env.clone(),
        })
    }
}

pub fn build_instance(cell: &ScenarioConfig, seeds: &InstanceSeeds) -> Result<GeneratedInstance> {
    let instance = generate_instance(&cell.with_seed(seeds.instance_seed))?;
    let envs = seeds
        .env_seeds
        .iter()
        .map(|&s| sample_environment(&instance, cell.prob_cloud, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedInstance {
        instance: Arc::new(instance),
        envs,
    })
}

/// Train, validation and test cases of one cell, in instance order.
#[derive(Debug, Clone)]
pub struct CellData {
    pub config: ScenarioConfig,
    pub train: Vec<Case>,
    pub valid: Vec<Case>,
    pub test: Vec<Case>,
}

impl CellData {
    pub fn id(&self) -> String {
        self.config.cell_id()
    }

    pub fn split(&self, split: Split) -> &[Case] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }
}

/// Samples a cell in memory.
pub fn build_cell(cell: &CellManifest) -> Result<CellData> {
    let build = |split: Split| -> Result<Vec<Case>> {
        let mut cases = Vec::new();
        for seeds in cell.split(split) {
            cases.extend(build_instance(&cell.config, seeds)?.cases());
        }
        Ok(cases)
    };
    Ok(CellData {
        config: cell.config,
        train: build(Split::Train)?,
        valid: build(Split::Valid)?,
        test: build(Split::Test)?,
    })
}

fn instance_path(cell_dir: &Path, split: Split, i: usize) -> PathBuf {
    cell_dir.join(split.name()).join(format!("instance_{i}.json"))
}

fn envs_path(cell_dir: &Path, split: Split, i: usize) -> PathBuf {
    cell_dir.join(split.name()).join(format!("envs_{i}.json"))
}

/// Materializes `manifest` under `out`. Refuses to touch an existing manifest or cell
/// directory.
pub fn write_benchmark(manifest: &Manifest, out: &Path) -> Result<()> {
    let manifest_path = out.join(MANIFEST_FILE);
    if manifest_path.exists() {
        return Err(Error::PathExists(manifest_path));
    }
    for cell in &manifest.cells {
        let dir = out.join(cell.id());
        if dir.exists() {
            return Err(Error::PathExists(dir));
        }
    }
    fs::create_dir_all(out)?;
    manifest.cells.par_iter().try_for_each(|cell| -> Result<()> {
        let dir = out.join(cell.id());
        for split in Split::ALL {
            fs::create_dir_all(dir.join(split.name()))?;
            for seeds in cell.split(split) {
                let g = build_instance(&cell.config, seeds)?;
                fs::write(instance_path(&dir, split, seeds.index), serde_json::to_string_pretty(&*g.instance)?)?;
                fs::write(envs_path(&dir, split, seeds.index), serde_json::to_string_pretty(&g.envs)?)?;
            }
        }
        log::info!("wrote cell {}", cell.id());
        Ok(())
    })?;
    fs::write(&manifest_path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

/// Plans and writes a benchmark in one step.
pub fn generate_benchmark(out: &Path, master_seed: u64, profile: Profile, filter: &ScenarioFilter) -> Result<Manifest> {
    let manifest = plan_benchmark(master_seed, profile, filter);
    write_benchmark(&manifest, out)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(manifest)
}

/// Reads a cell written by [`write_benchmark`].
pub fn load_cell(dir: &Path, cell: &CellManifest) -> Result<CellData> {
    let cell_dir = dir.join(cell.id());
    let load = |split: Split| -> Result<Vec<Case>> {
        let mut cases = Vec::new();
        for seeds in cell.split(split) {
            let instance: Instance =
                serde_json::from_str(&fs::read_to_string(instance_path(&cell_dir, split, seeds.index))?)?;
            let envs: Vec<EnvironmentRealization> =
                serde_json::from_str(&fs::read_to_string(envs_path(&cell_dir, split, seeds.index))?)?;
            for env in &envs {
                env.check_against(&instance)?;
            }
            let instance = Arc::new(instance);
            cases.extend(envs.into_iter().map(|env| Case {
                instance: Arc::clone(&instance),
                env,
            }));
        }
        Ok(cases)
    };
    Ok(CellData {
        config: cell.config,
        train: load(Split::Train)?,
        valid: load(Split::Valid)?,
        test: load(Split::Test)?,
    })
}
