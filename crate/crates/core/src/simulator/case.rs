use std::sync::Arc;

use super::rollout::{rollout, Policy};
use crate::model::{EnvironmentRealization, Instance};

/// One evaluation scenario: an instance with one realization of its uncertainty.
#[derive(Debug, Clone)]
pub struct Case {
    pub instance: Arc<Instance>,
    pub env: EnvironmentRealization,
}

/// Mean rollout profit over `cases`; 0 for an empty slice.
pub fn mean_profit<P: Policy + ?Sized>(policy: &P, cases: &[Case], slack_m: f64) -> f64 {
    if cases.is_empty() {
        return 0.0;
    }
    let total: f64 = cases
        .iter()
        .map(|c| rollout(&c.instance, &c.env, policy, slack_m).total_profit)
        .sum();
    total / cases.len() as f64
}
