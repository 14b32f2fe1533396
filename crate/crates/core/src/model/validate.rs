//! Offline feasibility checking of schedules against the full constraint set.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::attitude::Attitude;
use super::instance::{EnvironmentRealization, Instance};
use super::schedule::{Schedule, ScheduleStatus};

const TIME_TOLERANCE: f64 = 1e-6;
const MEMORY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintTag {
    UnknownTask,
    /// A task appears more than once (self-loops and sub-tours).
    Distinct,
    /// Observations not ordered by start time.
    Ordering,
    Memory,
    Visibility,
    Window,
    Duration,
    Transition,
    /// Claimed imaging failure that is not terminal or not an actual overrun.
    FailureStatus,
    /// Stored profit or memory totals disagree with the observations.
    Accounting,
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintTag,
    pub tasks: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, tag: ConstraintTag) -> usize {
        self.violations.iter().filter(|v| v.constraint == tag).count()
    }

    fn push(&mut self, constraint: ConstraintTag, tasks: Vec<usize>, detail: String) {
        self.violations.push(Violation {
            constraint,
            tasks,
            detail,
        });
    }
}

/// Check a schedule against every constraint and return all violations found.
///
/// A schedule ending in an imaging failure is accepted when the failing entry is last,
/// its realized draw really exceeds the remaining memory, and everything before it is
/// feasible. The failing entry still has to respect timing constraints.
pub fn validate_schedule(
    instance: &Instance,
    env: &EnvironmentRealization,
    schedule: &Schedule,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = instance.len();
    let obs = &schedule.observations;

    let failed = schedule.failed_index();
    if let Some(idx) = failed {
        if idx + 1 != obs.len() {
            report.push(
                ConstraintTag::FailureStatus,
                vec![],
                format!("imaging failure at index {idx} is not the final entry of {}", obs.len()),
            );
        }
    }

    let mut seen = HashSet::new();
    let mut memory = 0.0;
    let mut profit = 0.0;
    let mut prev: Option<usize> = None;
    let mut prev_start = f64::NEG_INFINITY;
    // virtual start: boot attitude at t = 0
    let mut prev_end = 0.0;
    let mut prev_att = Attitude::ZERO;

    for (k, o) in obs.iter().enumerate() {
        if o.task >= n {
            report.push(
                ConstraintTag::UnknownTask,
                vec![o.task],
                format!("entry {k} references task {} but the instance has {n}", o.task),
            );
            prev = None;
            continue;
        }
        let task = instance.task(o.task);
        if !seen.insert(o.task) {
            report.push(
                ConstraintTag::Distinct,
                vec![o.task],
                format!("task {} observed more than once", o.task),
            );
        }
        if o.start < prev_start {
            report.push(
                ConstraintTag::Ordering,
                vec![o.task],
                format!("entry {k} starts at {} before the previous start {prev_start}", o.start),
            );
        }
        prev_start = o.start;
        if !env.visible[o.task] {
            report.push(
                ConstraintTag::Visibility,
                vec![o.task],
                format!("task {} is cloud covered", o.task),
            );
        }
        if o.start < task.ws - TIME_TOLERANCE || o.end > task.we + TIME_TOLERANCE {
            report.push(
                ConstraintTag::Window,
                vec![o.task],
                format!(
                    "observation [{}, {}] leaves window [{}, {}]",
                    o.start, o.end, task.ws, task.we
                ),
            );
        }
        if o.start.partial_cmp(&o.end) != Some(std::cmp::Ordering::Less) || ((o.end - o.start) - task.du).abs() > TIME_TOLERANCE {
            report.push(
                ConstraintTag::Duration,
                vec![o.task],
                format!(
                    "observation lasts {} s but task {} needs {} s",
                    o.end - o.start,
                    o.task,
                    task.du
                ),
            );
        }

        let start_att = task.attitude_unchecked(o.start);
        let needed = instance.transition_time(&prev_att, &start_att);
        if prev_end + needed > o.start + TIME_TOLERANCE {
            let tasks = match prev {
                Some(id) => vec![id, o.task],
                None => vec![o.task],
            };
            report.push(
                ConstraintTag::Transition,
                tasks,
                format!(
                    "starts at {} but the maneuver from {prev_end} needs {needed} s",
                    o.start
                ),
            );
        }

        let draw = env.memory_draw(instance, o.task);
        if failed == Some(k) {
            if memory + draw <= instance.mmc() + MEMORY_TOLERANCE {
                report.push(
                    ConstraintTag::FailureStatus,
                    vec![o.task],
                    format!(
                        "reported imaging failure but draw {draw} fits remaining {}",
                        instance.mmc() - memory
                    ),
                );
            }
        } else if failed.is_none_or(|f| k < f) {
            memory += draw;
            profit += env.actual_profit[o.task];
            if memory > instance.mmc() + MEMORY_TOLERANCE {
                report.push(
                    ConstraintTag::Memory,
                    vec![o.task],
                    format!("cumulative memory {memory} exceeds capacity {}", instance.mmc()),
                );
            }
        }

        prev_end = o.end;
        prev_att = task.attitude_unchecked(o.end);
        prev = Some(o.task);
    }

    let profit_tol = 1e-9 * profit.abs().max(1.0);
    if (schedule.realized_profit - profit).abs() > profit_tol {
        report.push(
            ConstraintTag::Accounting,
            vec![],
            format!(
                "stored profit {} differs from recomputed {profit}",
                schedule.realized_profit
            ),
        );
    }
    if (schedule.memory_used - memory).abs() > MEMORY_TOLERANCE * memory.abs().max(1.0) {
        report.push(
            ConstraintTag::Accounting,
            vec![],
            format!("stored memory {} differs from recomputed {memory}", schedule.memory_used),
        );
    }
    if matches!(schedule.status, ScheduleStatus::ImagingFailure { index } if index >= obs.len()) {
        report.push(
            ConstraintTag::FailureStatus,
            vec![],
            "imaging failure index is past the end of the schedule".into(),
        );
    }
    report
}
