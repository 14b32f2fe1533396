use super::search::{earliest_start, Predecessor};
use crate::model::Instance;

/// State visible to a policy at a decision point.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionContext {
    pub t_now: f64,
    pub prev: Predecessor,
    pub remaining_memory: f64,
    /// Remaining candidate task ids, ascending by window start (ties by id).
    pub pool: Vec<usize>,
    pub tasks_total: usize,
    /// Scheduling horizon T in seconds.
    pub horizon: f64,
}

impl DecisionContext {
    /// Boot state for `instance` with the given initial pool.
    pub fn initial(instance: &Instance, mut pool: Vec<usize>) -> Self {
        sort_pool(instance, &mut pool);
        Self {
            t_now: 0.0,
            prev: Predecessor::INITIAL,
            remaining_memory: instance.mmc(),
            pool,
            tasks_total: instance.len(),
            horizon: instance.horizon(),
        }
    }
}

pub(crate) fn sort_pool(instance: &Instance, pool: &mut [usize]) {
    pool.sort_by(|&a, &b| {
        instance
            .task(a)
            .ws
            .total_cmp(&instance.task(b).ws)
            .then(a.cmp(&b))
    });
}

/// A task that survived filtering, with its earliest feasible start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub task: usize,
    pub earliest_start: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    /// Schedulable tasks in pool order.
    pub candidates: Vec<Candidate>,
    /// Tasks that can never be scheduled again (window closed or memory short).
    pub retired: Vec<usize>,
}

/// Applies the pruning, timeout, capacity and earliest-start checks to the pool.
///
/// Once `t_now + max_transition_time <= ws` for a task, the same holds for every later
/// task in the pool; their timing checks are skipped and they start at their window
/// opening. The capacity check still applies to them. Timeout and capacity failures are
/// permanent because time only advances and memory only shrinks; a missing earliest
/// start only excludes the task from the current decision.
pub fn filter_pool(ctx: &DecisionContext, instance: &Instance, slack_m: f64) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    let horizon_safe = ctx.t_now + instance.max_transition_time();
    let mut pruned = false;
    for &id in &ctx.pool {
        let task = instance.task(id);
        pruned = pruned || horizon_safe <= task.ws;
        if !pruned && ctx.t_now + task.du > task.we {
            out.retired.push(id);
            continue;
        }
        if slack_m * instance.expected_rate() * task.du > ctx.remaining_memory {
            out.retired.push(id);
            continue;
        }
        let start = if pruned {
            Some(task.ws.max(ctx.prev.end))
        } else {
            earliest_start(instance.transition(), &ctx.prev, task)
        };
        if let Some(earliest_start) = start {
            out.candidates.push(Candidate {
                task: id,
                earliest_start,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Attitude, AttitudeBounds, AttitudeProfile, Task, TransitionModel};

    fn task(id: usize, ws: f64, we: f64, du: f64) -> Task {
        Task {
            id,
            ws,
            we,
            du,
            expected_profit: 10.0,
            profile: AttitudeProfile::constant(Attitude::ZERO),
        }
    }

    fn instance(tasks: Vec<Task>) -> Instance {
        Instance::new(
            tasks,
            2000.0,
            1000.0,
            1.0,
            TransitionModel::standard(),
            AttitudeBounds::symmetric(27.0),
        )
        .unwrap()
    }

    #[test]
    fn no_memory_empties_pool() {
        let inst = instance(vec![task(0, 0.0, 100.0, 10.0), task(1, 500.0, 600.0, 10.0)]);
        let mut ctx = DecisionContext::initial(&inst, vec![0, 1]);
        ctx.remaining_memory = 0.0;
        let out = filter_pool(&ctx, &inst, 1.0);
        assert!(out.candidates.is_empty());
        assert_eq!(out.retired, vec![0, 1]);
    }

    #[test]
    fn timeout_boundary() {
        let inst = instance(vec![task(0, 0.0, 100.0, 20.0)]);
        let mut ctx = DecisionContext::initial(&inst, vec![0]);
        ctx.t_now = 100.0 - 20.0 + 1.0;
        ctx.prev.end = ctx.t_now;
        let out = filter_pool(&ctx, &inst, 1.0);
        assert_eq!(out.retired, vec![0]);
        ctx.t_now = 40.0;
        ctx.prev.end = 40.0;
        let out = filter_pool(&ctx, &inst, 1.0);
        assert_eq!(out.candidates.len(), 1);
    }

    #[test]
    fn closed_window_dropped_others_kept() {
        let inst = instance(vec![
            task(0, 0.0, 120.0, 20.0),
            task(1, 50.0, 300.0, 20.0),
            task(2, 400.0, 500.0, 20.0),
        ]);
        let mut ctx = DecisionContext::initial(&inst, vec![0, 1, 2]);
        ctx.t_now = 110.0;
        ctx.prev.end = 110.0;
        let out = filter_pool(&ctx, &inst, 1.0);
        assert_eq!(out.retired, vec![0]);
        let ids: Vec<_> = out.candidates.iter().map(|c| c.task).collect();
        assert_eq!(ids, vec![1, 2]);
        // exhaustive per-task check: earliest start equals the direct search result
        for c in &out.candidates {
            let direct = earliest_start(inst.transition(), &ctx.prev, inst.task(c.task)).unwrap();
            assert!((c.earliest_start - direct).abs() <= 1e-3);
        }
        assert_eq!(out.candidates[1].earliest_start, 400.0);
    }

    #[test]
    fn slack_factor_tightens_capacity() {
        let inst = instance(vec![task(0, 0.0, 100.0, 20.0)]);
        let mut ctx = DecisionContext::initial(&inst, vec![0]);
        ctx.remaining_memory = 30.0;
        assert_eq!(filter_pool(&ctx, &inst, 1.0).candidates.len(), 1);
        assert_eq!(filter_pool(&ctx, &inst, 2.0).retired, vec![0]);
    }
}
