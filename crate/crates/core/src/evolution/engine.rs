use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::EvolutionConfig;
use super::operators::{random_tree, vary};
use crate::error::{Error, Result};
use crate::policy::PolicyTree;
use crate::simulator::{mean_profit, Case};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: PolicyTree,
    /// Mean profit over the last batch this individual was evaluated on.
    pub fitness: Option<f64>,
    pub batch: Option<usize>,
}

impl Individual {
    pub fn new(tree: PolicyTree) -> Self {
        Self {
            tree,
            fitness: None,
            batch: None,
        }
    }
}

/// One row of the training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub batch: usize,
    pub batch_best_fitness: f64,
    pub validation_profit: f64,
    pub best_size: usize,
    pub best_depth: usize,
    pub best_tree: String,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub best: PolicyTree,
    pub best_validation: f64,
    /// `None` when no generation ran and the initial population was ranked directly.
    pub best_generation: Option<usize>,
    pub history: Vec<GenerationRecord>,
}

/// Generator for `stream`: 0 seeds the initial population, `g + 1` the variation of
/// generation `g`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn init_population(config: &EvolutionConfig) -> Vec<Individual> {
    let mut rng = rng_for(config.seed, 0);
    (0..config.population_size)
        .map(|_| Individual::new(random_tree(config, &mut rng)))
        .collect()
}

pub fn fitness(tree: &PolicyTree, batch: &[Case], slack_m: f64) -> f64 {
    mean_profit(tree, batch, slack_m)
}

fn evaluate_all(trees: &[PolicyTree], cases: &[Case], slack_m: f64) -> Vec<f64> {
    trees.par_iter().map(|t| fitness(t, cases, slack_m)).collect()
}

// first index wins ties
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Generational GP with mini-batch rotation.
///
/// Generation `g` evaluates the population on batch `g % batches`, scores its batch
/// best on `valid`, and returns the best validation performer over all generations.
/// The observer sees every generation's record and evaluated population.
pub fn evolve(
    train: &[Case],
    valid: &[Case],
    config: &EvolutionConfig,
    mut observer: impl FnMut(&GenerationRecord, &[Individual]),
) -> Result<EvolutionResult> {
    config.validate()?;
    if train.is_empty() || !train.len().is_multiple_of(config.batches) {
        return Err(Error::Config(format!(
            "{} training cases cannot be split into {} equal batches",
            train.len(),
            config.batches
        )));
    }
    if valid.is_empty() {
        return Err(Error::Config("validation set is empty".into()));
    }
    let batch_size = train.len() / config.batches;
    let mut population = init_population(config);

    if config.generations == 0 {
        let trees: Vec<PolicyTree> = population.into_iter().map(|i| i.tree).collect();
        let scores = evaluate_all(&trees, valid, config.slack_m);
        let best = argmax(&scores);
        return Ok(EvolutionResult {
            best: trees[best].clone(),
            best_validation: scores[best],
            best_generation: None,
            history: Vec::new(),
        });
    }

    let mut history = Vec::with_capacity(config.generations);
    let mut best: Option<(PolicyTree, f64, usize)> = None;
    for g in 0..config.generations {
        if g > 0 {
            let mut rng = rng_for(config.seed, g as u64 + 1);
            let parents: Vec<PolicyTree> = population.iter().map(|i| i.tree.clone()).collect();
            let fit: Vec<f64> = population.iter().map(|i| i.fitness.unwrap_or(f64::NEG_INFINITY)).collect();
            population = vary(&parents, &fit, config, &mut rng)
                .into_iter()
                .map(Individual::new)
                .collect();
        }
        let b = g % config.batches;
        let batch = &train[b * batch_size..(b + 1) * batch_size];
        let trees: Vec<PolicyTree> = population.iter().map(|i| i.tree.clone()).collect();
        let scores = evaluate_all(&trees, batch, config.slack_m);
        for (ind, s) in population.iter_mut().zip(&scores) {
            ind.fitness = Some(*s);
            ind.batch = Some(b);
        }
        let top = &population[argmax(&scores)].tree;
        let validation = fitness(top, valid, config.slack_m);
        let record = GenerationRecord {
            generation: g,
            batch: b,
            batch_best_fitness: scores[argmax(&scores)],
            validation_profit: validation,
            best_size: top.size(),
            best_depth: top.depth(),
            best_tree: top.to_string(),
        };
        log::debug!(
            "generation {g} batch {b}: batch best {:.2}, validation {:.2}",
            record.batch_best_fitness,
            validation
        );
        if best.as_ref().is_none_or(|(_, v, _)| validation > *v) {
            best = Some((top.clone(), validation, g));
        }
        observer(&record, &population);
        history.push(record);
    }
    let (best, best_validation, generation) = best.expect("at least one generation ran");
    Ok(EvolutionResult {
        best,
        best_validation,
        best_generation: Some(generation),
        history,
    })
}

/// Writes the history as CSV with one header row.
pub fn write_history_csv<W: Write>(writer: W, history: &[GenerationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for rec in history {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}
