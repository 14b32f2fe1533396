//! Evolving satellite scheduling policies with genetic programming.
//!
//! The crate models single-satellite agile Earth observation scheduling under
//! uncertain profits, memory consumption and cloud cover. Policies are expression
//! trees scored inside a constructive rollout; they are evolved with a generational
//! GP loop and compared against look-ahead and hand-written dispatching rules.

pub mod baselines;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod instance_gen;
pub mod model;
pub mod policy;
pub mod simulator;

pub use error::{Error, Result};
