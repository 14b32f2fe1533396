//! Synthetic benchmark generation over the NT x ST x MMC x cloud grid.

mod benchmark;
mod generator;

pub use benchmark::{
    build_cell, build_instance, generate_benchmark, load_cell, plan_benchmark, read_manifest, write_benchmark,
    CellData, CellManifest, GeneratedInstance, InstanceSeeds, Manifest, Profile, ScenarioFilter, Split, SplitCounts,
    GENERATOR_VERSION, MANIFEST_FILE,
};
pub use generator::{
    derive_seed, gamma_sample, generate_instance, generate_tasks, grid, mmc_options, sample_environment,
    ScenarioConfig, ATTITUDE_LIMIT_DEG, CLOUD_PROBS, EXPECTED_RATE, HORIZONS, PROFIT_SHAPE, RATE_SHAPE, TASK_COUNTS,
};
