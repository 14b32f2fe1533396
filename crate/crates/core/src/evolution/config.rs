use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// GP parameters. Depths count edges, so a lone terminal has depth 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub init_min_depth: usize,
    pub init_max_depth: usize,
    pub mutation_subtree_min_depth: usize,
    pub mutation_subtree_max_depth: usize,
    pub overall_max_depth: usize,
    /// Number of equal mini-batches the training cases are split into.
    pub batches: usize,
    pub slack_m: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 60,
            crossover_prob: 0.85,
            mutation_prob: 0.15,
            tournament_size: 4,
            init_min_depth: 2,
            init_max_depth: 6,
            mutation_subtree_min_depth: 0,
            mutation_subtree_max_depth: 4,
            overall_max_depth: 8,
            batches: 20,
            slack_m: 1.0,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1");
        }
        if self.population_size < self.tournament_size {
            return bad("population_size must be at least tournament_size");
        }
        if self.init_min_depth == 0 || self.init_min_depth > self.init_max_depth {
            return bad("init depths must satisfy 1 <= init_min_depth <= init_max_depth");
        }
        if self.mutation_subtree_min_depth > self.mutation_subtree_max_depth
            || self.mutation_subtree_max_depth == 0
        {
            return bad("mutation subtree depths must satisfy min <= max and max >= 1");
        }
        if self.init_max_depth > self.overall_max_depth
            || self.mutation_subtree_max_depth > self.overall_max_depth
        {
            return bad("overall_max_depth must cover the initial and mutation depths");
        }
        if self.batches == 0 {
            return bad("batches must be at least 1");
        }
        if !(self.slack_m > 0.0 && self.slack_m.is_finite()) {
            return bad("slack_m must be positive");
        }
        Ok(())
    }
}
