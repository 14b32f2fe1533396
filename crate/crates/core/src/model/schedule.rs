use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A committed imaging action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub task: usize,
    #[serde(rename = "os_s")]
    pub start: f64,
    #[serde(rename = "oe_s")]
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleStatus {
    Completed,
    /// The observation at `index` overran the remaining memory and ended the rollout.
    ImagingFailure { index: usize },
}

/// Ordered observation sequence with its realized outcome.
///
/// The sequence form carries the successor relation implicitly; the virtual start and
/// end tasks are the sequence boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub observations: Vec<Observation>,
    pub status: ScheduleStatus,
    pub realized_profit: f64,
    #[serde(rename = "memory_used_units")]
    pub memory_used: f64,
}

impl Schedule {
    pub fn empty() -> Self {
        Self {
            observations: Vec::new(),
            status: ScheduleStatus::Completed,
            realized_profit: 0.0,
            memory_used: 0.0,
        }
    }

    pub fn failed_index(&self) -> Option<usize> {
        match self.status {
            ScheduleStatus::Completed => None,
            ScheduleStatus::ImagingFailure { index } => Some(index),
        }
    }

    /// Observations that completed and earned profit.
    pub fn completed(&self) -> &[Observation] {
        match self.failed_index() {
            Some(i) => &self.observations[..i.min(self.observations.len())],
            None => &self.observations,
        }
    }
}

/// Mean realized profit over a set of environments.
pub fn expected_total_profit(profits: &[f64]) -> Result<f64> {
    if profits.is_empty() {
        return Err(Error::EmptyProfits);
    }
    Ok(profits.iter().sum::<f64>() / profits.len() as f64)
}
