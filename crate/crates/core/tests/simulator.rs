mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_delay, scan_earliest, small_instance, PriorityOrder};
use satsched::instance_gen::{generate_instance, sample_environment, ScenarioConfig};
use satsched::model::{validate_schedule, EnvironmentRealization, ScheduleStatus};
use satsched::simulator::{
    delay, earliest_start, filter_pool, mean_profit, rollout, write_trace_csv, Case, DecisionContext, DecisionView,
    Predecessor, ScoreFn,
};

fn by_profit(view: &DecisionView<'_>, i: usize) -> f64 {
    view.instance.task(view.candidates[i].task).expected_profit
}

fn nan_score(_: &DecisionView<'_>, _: usize) -> f64 {
    f64::NAN
}

#[test]
fn delay_agrees_with_formula() {
    let inst = generate_instance(&ScenarioConfig { nt: 50, st: 2000, mmc: 1024, prob_cloud: 0.2, seed: 3 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let p = inst.task(rng.random_range(0..50));
        let n = inst.task(rng.random_range(0..50));
        let prev = Predecessor::after(p, p.we);
        let os = rng.random_range(n.ws..=n.we);
        let got = delay(inst.transition(), &prev, n, os);
        assert!((got - oracle_delay(prev.end, &prev.attitude, n, os)).abs() < 1e-9);
    }
}

#[test]
fn first_decision_has_whole_visible_pool() {
    let inst = generate_instance(&ScenarioConfig { nt: 50, st: 2000, mmc: 4096, prob_cloud: 0.0, seed: 4 }).unwrap();
    let ctx = DecisionContext::initial(&inst, (0..inst.len()).collect());
    let out = filter_pool(&ctx, &inst, 1.0);
    assert!(out.retired.is_empty());
    assert_eq!(out.candidates.len(), inst.len());
    for c in &out.candidates {
        assert_eq!(c.earliest_start, inst.task(c.task).ws.max(0.0));
    }
    // pool order is by window start
    let starts: Vec<f64> = out.candidates.iter().map(|c| inst.task(c.task).ws).collect();
    assert!(starts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn memory_slack_tightens_capacity_filter() {
    let inst = small_instance(&mut ChaCha8Rng::seed_from_u64(5), 6, 2000.0, 1.0e5);
    let mut ctx = DecisionContext::initial(&inst, (0..inst.len()).collect());
    let need: Vec<f64> = (0..inst.len()).map(|i| inst.expected_rate() * inst.task(i).du).collect();
    let smallest = need.iter().cloned().fold(f64::INFINITY, f64::min);

    ctx.remaining_memory = smallest * 0.9;
    let short = filter_pool(&ctx, &inst, 1.0);
    assert!(short.candidates.is_empty());
    assert_eq!(short.retired.len(), inst.len());

    ctx.remaining_memory = smallest * 1.1;
    assert!(!filter_pool(&ctx, &inst, 1.0).candidates.is_empty());
    let cautious = filter_pool(&ctx, &inst, 1.2);
    assert!(cautious.candidates.is_empty());

    ctx.remaining_memory = 0.0;
    assert!(filter_pool(&ctx, &inst, 0.5).candidates.is_empty());
}

#[test]
fn imaging_failure_ends_rollout_without_profit() {
    let inst = small_instance(&mut ChaCha8Rng::seed_from_u64(6), 6, 2000.0, 1.0e5);
    let mut env = EnvironmentRealization::expected(&inst);
    let first = rollout(&inst, &env, &ScoreFn(by_profit), 1.0).schedule.observations[0].task;
    env.actual_rate[first] = 1.0e6;
    let out = rollout(&inst, &env, &ScoreFn(by_profit), 1.0);
    assert_eq!(out.schedule.status, ScheduleStatus::ImagingFailure { index: 0 });
    assert_eq!(out.total_profit, 0.0);
    assert_eq!(out.schedule.observations.len(), 1);
    assert!(validate_schedule(&inst, &env, &out.schedule).is_feasible());
}

#[test]
fn hidden_tasks_are_never_scheduled() {
    let inst = generate_instance(&ScenarioConfig { nt: 50, st: 2000, mmc: 4096, prob_cloud: 0.5, seed: 7 }).unwrap();
    let env = sample_environment(&inst, 0.5, 70).unwrap();
    let out = rollout(&inst, &env, &ScoreFn(by_profit), 1.0);
    assert!(out.schedule.observations.iter().all(|o| env.visible[o.task]));

    let mut dark = env.clone();
    dark.visible.fill(false);
    let none = rollout(&inst, &dark, &ScoreFn(by_profit), 1.0);
    assert!(none.schedule.observations.is_empty());
    assert_eq!(none.total_profit, 0.0);
}

#[test]
fn non_finite_scores_fall_back_to_smallest_id() {
    let inst = small_instance(&mut ChaCha8Rng::seed_from_u64(8), 5, 2000.0, 1.0e5);
    let env = EnvironmentRealization::expected(&inst);
    let a = rollout(&inst, &env, &ScoreFn(nan_score), 1.0);
    let b = rollout(&inst, &env, &PriorityOrder::new(&[0, 1, 2, 3, 4]), 1.0);
    assert_eq!(a.schedule, b.schedule);
}

#[test]
fn trace_csv_has_one_row_per_decision() {
    let inst = generate_instance(&ScenarioConfig { nt: 50, st: 2000, mmc: 1024, prob_cloud: 0.2, seed: 9 }).unwrap();
    let env = sample_environment(&inst, 0.2, 90).unwrap();
    let out = rollout(&inst, &env, &ScoreFn(by_profit), 1.0);
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &out.trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), out.trace.len() + 1);
    assert_eq!(out.trace.len(), out.schedule.observations.len());
    assert_eq!(out.trace.last().map(|r| r.cumulative_profit), Some(out.total_profit));
}

#[test]
fn mean_profit_of_no_cases_is_zero() {
    assert_eq!(mean_profit(&ScoreFn(by_profit), &[], 1.0), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn earliest_start_matches_scan(seed in any::<u64>(), shift in -80.0f64..40.0, frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = small_instance(&mut rng, 2, 600.0, 1.0e5);
        let (p, n) = (inst.task(0), inst.task(1));
        let prev = Predecessor::after(p, p.ws + p.du + frac * (p.we - p.ws - p.du));
        let mut next = n.clone();
        let d = prev.end - n.ws + shift;
        next.ws += d;
        next.we += d;
        let got = earliest_start(inst.transition(), &prev, &next);
        let want = scan_earliest(prev.end, &prev.attitude, &next);
        match (got, want) {
            (Some(a), Some(b)) => {
                prop_assert!((a - b).abs() <= 1e-3 + 1e-9, "search {a}, scan {b}");
                prop_assert!(oracle_delay(prev.end, &prev.attitude, &next, a) <= 0.0);
                prop_assert!(a >= next.ws && a + next.du <= next.we);
            }
            (None, None) => {}
            other => prop_assert!(false, "disagreement {other:?}"),
        }
    }

    #[test]
    fn rollouts_validate_and_repeat(seed in any::<u64>(), cloud in 0.0f64..0.6, slack in 1.0f64..1.5) {
        let cfg = ScenarioConfig { nt: 50, st: 2000, mmc: 1024, prob_cloud: 0.2, seed };
        let inst = generate_instance(&cfg).unwrap();
        let env = sample_environment(&inst, cloud, seed ^ 1).unwrap();
        let a = rollout(&inst, &env, &ScoreFn(by_profit), slack);
        let report = validate_schedule(&inst, &env, &a.schedule);
        prop_assert!(report.is_feasible(), "{:?}", report.violations);
        let b = rollout(&inst, &env, &ScoreFn(by_profit), slack);
        prop_assert_eq!(&a, &b);
        let case = Case { instance: inst.into(), env };
        prop_assert_eq!(mean_profit(&ScoreFn(by_profit), std::slice::from_ref(&case), slack), a.total_profit);
    }
}
