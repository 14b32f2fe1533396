use std::io::Write;

use serde::{Deserialize, Serialize};

use super::filter::{filter_pool, Candidate, DecisionContext};
use super::search::Predecessor;
use crate::error::Result;
use crate::model::{EnvironmentRealization, Instance, Observation, Schedule, ScheduleStatus};

/// Read-only view handed to a policy at each decision.
#[derive(Debug, Clone, Copy)]
pub struct DecisionView<'a> {
    pub ctx: &'a DecisionContext,
    pub candidates: &'a [Candidate],
    pub instance: &'a Instance,
    pub env: &'a EnvironmentRealization,
}

/// Chooses the next observation among the filtered candidates.
pub trait Policy {
    /// Index into `view.candidates`; `view.candidates` is never empty.
    fn select(&self, view: &DecisionView<'_>) -> usize;
}

impl<P: Policy + ?Sized> Policy for &P {
    fn select(&self, view: &DecisionView<'_>) -> usize {
        (**self).select(view)
    }
}

/// Index of the highest-scoring candidate; ties go to the smallest task id and
/// non-finite scores count as 1.
pub fn select_max(view: &DecisionView<'_>, mut score: impl FnMut(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..view.candidates.len() {
        let mut s = score(i);
        if !s.is_finite() {
            s = 1.0;
        }
        let better = s > best_score
            || (s == best_score && view.candidates[i].task < view.candidates[best].task);
        if better {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Adapts a scoring closure into a [`Policy`].
pub struct ScoreFn<F>(pub F);

impl<F> Policy for ScoreFn<F>
where
    F: Fn(&DecisionView<'_>, usize) -> f64,
{
    fn select(&self, view: &DecisionView<'_>) -> usize {
        select_max(view, |i| (self.0)(view, i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    #[serde(rename = "t_now_s")]
    pub t_now: f64,
    pub task: usize,
    pub pool_size: usize,
    pub cumulative_profit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    pub schedule: Schedule,
    pub trace: Vec<DecisionRecord>,
    pub total_profit: f64,
}

/// Builds a schedule by repeatedly filtering the pool and committing the policy's pick
/// at its earliest feasible start.
///
/// Memory consumption is revealed only after imaging; a draw larger than the remaining
/// memory is an imaging failure that earns nothing and ends the rollout.
pub fn rollout<P: Policy + ?Sized>(
    instance: &Instance,
    env: &EnvironmentRealization,
    policy: &P,
    slack_m: f64,
) -> RolloutOutcome {
    let visible: Vec<usize> = (0..instance.len()).filter(|&i| env.visible[i]).collect();
    let mut ctx = DecisionContext::initial(instance, visible);
    let mut schedule = Schedule::empty();
    let mut trace = Vec::new();

    loop {
        let filtered = filter_pool(&ctx, instance, slack_m);
        if !filtered.retired.is_empty() {
            ctx.pool.retain(|id| !filtered.retired.contains(id));
        }
        if filtered.candidates.is_empty() {
            break;
        }
        let view = DecisionView {
            ctx: &ctx,
            candidates: &filtered.candidates,
            instance,
            env,
        };
        let pick = filtered.candidates[policy.select(&view)];
        let task = instance.task(pick.task);
        let start = pick.earliest_start;
        let end = start + task.du;
        schedule.observations.push(Observation {
            task: pick.task,
            start,
            end,
        });

        let draw = env.memory_draw(instance, pick.task);
        let failed = draw > ctx.remaining_memory;
        if failed {
            schedule.status = ScheduleStatus::ImagingFailure {
                index: schedule.observations.len() - 1,
            };
        } else {
            ctx.remaining_memory -= draw;
            schedule.memory_used += draw;
            schedule.realized_profit += env.actual_profit[pick.task];
        }
        trace.push(DecisionRecord {
            t_now: ctx.t_now,
            task: pick.task,
            pool_size: filtered.candidates.len(),
            cumulative_profit: schedule.realized_profit,
        });
        if failed {
            break;
        }
        ctx.t_now = end;
        ctx.prev = Predecessor::after(task, end);
        ctx.pool.retain(|&id| id != pick.task);
    }

    RolloutOutcome {
        total_profit: schedule.realized_profit,
        schedule,
        trace,
    }
}

/// Writes a decision trace as CSV: `t_now_s,task,pool_size,cumulative_profit`.
pub fn write_trace_csv<W: Write>(writer: W, trace: &[DecisionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for rec in trace {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}
