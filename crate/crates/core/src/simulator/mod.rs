//! Constructive rollout of a scheduling policy under one sampled environment.

mod case;
mod filter;
mod rollout;
mod search;

pub use case::{mean_profit, Case};
pub use filter::{filter_pool, Candidate, DecisionContext, FilterOutcome};
pub use rollout::{
    rollout, select_max, write_trace_csv, DecisionRecord, DecisionView, Policy, RolloutOutcome,
    ScoreFn,
};
pub use search::{
    delay, earliest_start, earliest_start_counted, Predecessor, SearchOutcome, SEARCH_TOLERANCE,
};
