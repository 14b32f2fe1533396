use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Attitude, AttitudeBounds, AttitudeProfile, EnvironmentRealization, Instance, Task, TransitionModel};

pub const TASK_COUNTS: [usize; 4] = [50, 100, 150, 200];
pub const HORIZONS: [u32; 3] = [2000, 4000, 6000];
pub const CLOUD_PROBS: [f64; 3] = [0.1, 0.2, 0.3];

/// Shape of the realized-profit Gamma.
pub const PROFIT_SHAPE: f64 = 30.0;
/// Shape of the realized memory-rate Gamma.
pub const RATE_SHAPE: f64 = 350.0;
pub const EXPECTED_RATE: f64 = 3.5;
pub const ATTITUDE_LIMIT_DEG: f64 = 27.0;

const DURATION_MEAN: f64 = 25.0;
const DURATION_SD: f64 = 3.0;
const DURATION_FLOOR: f64 = 5.0;
const PROFIT_SD: f64 = 10.0;
const PROFIT_FLOOR: f64 = 1.0;
const WINDOW_MIN: f64 = 60.0;
const WINDOW_MAX: f64 = 180.0;
const WINDOW_MARGIN: f64 = 10.0;
const REJECTION_LIMIT: usize = 1000;

/// Memory capacities allowed for a task count.
pub fn mmc_options(nt: usize) -> Option<[u32; 3]> {
    match nt {
        50 => Some([1024, 2048, 4096]),
        100 | 150 => Some([2048, 4096, 6144]),
        200 => Some([4096, 6144, 8192]),
        _ => None,
    }
}

/// One benchmark cell plus the seed that drives its sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub nt: usize,
    pub st: u32,
    pub mmc: u32,
    pub prob_cloud: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Directory name, e.g. `50_2000_1024_0.2`.
    pub fn cell_id(&self) -> String {
        format!("{}_{}_{}_{}", self.nt, self.st, self.mmc, self.prob_cloud)
    }

    /// Checks the cell against the benchmark grid.
    pub fn validate(&self) -> Result<()> {
        let Some(options) = mmc_options(self.nt) else {
            return Err(Error::Config(format!("task count {} is not in the grid", self.nt)));
        };
        if !options.contains(&self.mmc) {
            return Err(Error::Config(format!("MMC {} is not paired with NT {}", self.mmc, self.nt)));
        }
        if !HORIZONS.contains(&self.st) {
            return Err(Error::Config(format!("horizon {} is not in the grid", self.st)));
        }
        if !(0.0..=1.0).contains(&self.prob_cloud) {
            return Err(Error::Config(format!("cloud probability {} out of range", self.prob_cloud)));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// All 108 cells in NT, ST, MMC, cloud order, each seeded from `master_seed` by position.
pub fn grid(master_seed: u64) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(108);
    for nt in TASK_COUNTS {
        for st in HORIZONS {
            for mmc in mmc_options(nt).expect("grid task counts have capacities") {
                for prob_cloud in CLOUD_PROBS {
                    let seed = derive_seed(master_seed, out.len() as u64);
                    out.push(ScenarioConfig { nt, st, mmc, prob_cloud, seed });
                }
            }
        }
    }
    out
}

/// Child seed `index` of `base` (SplitMix64 finalizer over a golden-ratio offset).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from Gamma(shape, scale = mean / shape), so the draw has mean `mean`.
pub fn gamma_sample<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> Result<f64> {
    if !(mean > 0.0 && shape > 0.0 && mean.is_finite() && shape.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "gamma needs positive mean and shape, got mean {mean}, shape {shape}"
        )));
    }
    let g = Gamma::new(shape, mean / shape).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    Ok(g.sample(rng))
}

fn truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, floor: f64, rng: &mut R) -> f64 {
    let n = Normal::new(mean, sd).expect("finite normal parameters");
    for _ in 0..REJECTION_LIMIT {
        let x = n.sample(rng);
        if x >= floor {
            return x;
        }
    }
    floor
}

/// Samples `nt` point targets over a horizon of `st` seconds.
pub fn generate_tasks<R: Rng + ?Sized>(nt: usize, st: f64, rng: &mut R) -> Vec<Task> {
    (0..nt)
        .map(|id| {
            let du = truncated_normal(DURATION_MEAN, DURATION_SD, DURATION_FLOOR, rng);
            let expected_profit = truncated_normal(2.0 * du, PROFIT_SD, PROFIT_FLOOR, rng);
            let lo = (du + WINDOW_MARGIN).max(WINDOW_MIN).min(st);
            let hi = WINDOW_MAX.max(lo).min(st);
            let len = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let ws = if st > len { rng.random_range(0.0..st - len) } else { 0.0 };
            let roll = rng.random_range(-ATTITUDE_LIMIT_DEG..ATTITUDE_LIMIT_DEG);
            // the pitch sweeps from looking forward to looking back across the window;
            // a window of at least 60 s keeps the sweep at or below 0.9 deg/s
            let profile = AttitudeProfile::linear(
                Attitude::new(ATTITUDE_LIMIT_DEG, roll, 0.0),
                Attitude::new(-ATTITUDE_LIMIT_DEG, roll, 0.0),
                len,
            );
            Task {
                id,
                ws,
                we: ws + len,
                du,
                expected_profit,
                profile,
            }
        })
        .collect()
}

/// Instance for a validated cell, sampled from `config.seed`.
pub fn generate_instance(config: &ScenarioConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let st = f64::from(config.st);
    Instance::new(
        generate_tasks(config.nt, st, &mut rng),
        st,
        f64::from(config.mmc),
        EXPECTED_RATE,
        TransitionModel::standard(),
        AttitudeBounds::symmetric(ATTITUDE_LIMIT_DEG),
    )
}

/// Realized profits, memory rates and visibility for one world.
///
/// Each task is hidden by cloud with probability `prob_cloud`.
pub fn sample_environment(instance: &Instance, prob_cloud: f64, seed: u64) -> Result<EnvironmentRealization> {
    if !(0.0..=1.0).contains(&prob_cloud) {
        return Err(Error::InvalidDistribution(format!("cloud probability {prob_cloud} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = instance.len();
    let mut env = EnvironmentRealization {
        seed,
        actual_profit: Vec::with_capacity(n),
        actual_rate: Vec::with_capacity(n),
        visible: Vec::with_capacity(n),
    };
    for task in instance.tasks() {
        env.actual_profit.push(gamma_sample(task.expected_profit, PROFIT_SHAPE, &mut rng)?);
        env.actual_rate.push(gamma_sample(instance.expected_rate(), RATE_SHAPE, &mut rng)?);
        env.visible.push(rng.random_bool(1.0 - prob_cloud));
    }
    Ok(env)
}
