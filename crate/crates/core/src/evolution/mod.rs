//! Genetic programming over policy trees with mini-batch fitness rotation.

mod config;
mod engine;
mod operators;

pub use config::EvolutionConfig;
pub use engine::{
    evolve, fitness, init_population, rng_for, write_history_csv, EvolutionResult, GenerationRecord,
    Individual,
};
pub use operators::{
    crossover_single_point, full, grow, half_and_half, mutate_uniform, random_terminal, random_tree,
    tournament_select, vary, InitMethod, MAX_RETRIES,
};
