//! Earliest feasible start times under time-dependent maneuver durations.
//!
//! For a fixed predecessor, the slack function
//! `delay(os) = prev_end + trans(att_prev, att(os)) - os`
//! is strictly decreasing wherever the transition model is continuous, because every
//! task sweeps its attitude slower than the slowest maneuver rate. The model can jump
//! upwards at segment boundaries, so the search first splits `[l, r]` at the start times
//! where the maneuver angle crosses such a boundary, then bisects the first piece that
//! contains a sign change.

use crate::model::{Attitude, Task, TransitionModel};

/// Absolute bracket width at which bisection stops, in seconds.
pub const SEARCH_TOLERANCE: f64 = 1e-3;

/// Distance kept from a boundary so the left piece is evaluated with its own segment.
const SPLIT_EPS: f64 = 1e-7;

/// End state of the previous observation (or the boot state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predecessor {
    pub end: f64,
    pub attitude: Attitude,
}

impl Predecessor {
    /// Boot state: attitude (0, 0, 0) at t = 0.
    pub const INITIAL: Predecessor = Predecessor {
        end: 0.0,
        attitude: Attitude::ZERO,
    };

    /// State after imaging `task` until `end`.
    pub fn after(task: &Task, end: f64) -> Self {
        Self {
            end,
            attitude: task.attitude_unchecked(end),
        }
    }
}

/// Slack of starting `task` at `os` after `prev`; non-positive means the maneuver fits.
#[inline]
pub fn delay(model: &TransitionModel, prev: &Predecessor, task: &Task, os: f64) -> f64 {
    let angle = prev.attitude.angle_to(&task.attitude_unchecked(os));
    prev.end + model.time(angle) - os
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub start: Option<f64>,
    /// Number of delay evaluations performed.
    pub evaluations: usize,
}

/// Earliest start of `task` after `prev` that respects the window and the maneuver time.
#[inline]
pub fn earliest_start(model: &TransitionModel, prev: &Predecessor, task: &Task) -> Option<f64> {
    earliest_start_counted(model, prev, task).start
}

pub fn earliest_start_counted(
    model: &TransitionModel,
    prev: &Predecessor,
    task: &Task,
) -> SearchOutcome {
    let mut evaluations = 0;
    let mut feasible = |os: f64| {
        evaluations += 1;
        delay(model, prev, task, os) <= 0.0
    };

    // stage 1: the window bracket
    let l = task.ws.max(prev.end);
    let r = task.latest_start();
    if r < l {
        return SearchOutcome {
            start: None,
            evaluations: 0,
        };
    }

    // stage 2: locate the first zero of the delay
    if feasible(l) {
        return SearchOutcome {
            start: Some(l),
            evaluations,
        };
    }
    let splits = split_points(model, prev, task, l, r);
    let mut piece_start = l;
    let mut start = None;
    for piece_end in splits.into_iter().chain(std::iter::once(r)) {
        if piece_start != l && feasible(piece_start) {
            start = Some(piece_start);
            break;
        }
        let hi = if piece_end == r { r } else { piece_end - SPLIT_EPS };
        if hi > piece_start && feasible(hi) {
            start = Some(bisect(piece_start, hi, &mut feasible));
            break;
        }
        piece_start = piece_end;
    }
    SearchOutcome { start, evaluations }
}

/// Shrinks `(lo, hi]` with `!f(lo)` and `f(hi)` until narrower than the tolerance and
/// returns the feasible end.
fn bisect(mut lo: f64, mut hi: f64, feasible: &mut impl FnMut(f64) -> bool) -> f64 {
    while hi - lo > SEARCH_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Start times in `(l, r)` where the maneuver angle crosses a discontinuity of the
/// transition model, in ascending order.
fn split_points(
    model: &TransitionModel,
    prev: &Predecessor,
    task: &Task,
    l: f64,
    r: f64,
) -> Vec<f64> {
    let jumps = model.jumps();
    if jumps.is_empty() || r <= l {
        return Vec::new();
    }
    // The angle is piecewise linear in os with kinks where an axis difference vanishes.
    let mut knots = vec![l];
    let profile = &task.profile;
    for (target, start, rate) in [
        (prev.attitude.pitch, profile.start.pitch, profile.rate.pitch),
        (prev.attitude.roll, profile.start.roll, profile.rate.roll),
        (prev.attitude.yaw, profile.start.yaw, profile.rate.yaw),
    ] {
        if rate != 0.0 {
            let t = task.ws + (target - start) / rate;
            if t > l && t < r {
                knots.push(t);
            }
        }
    }
    knots.push(r);
    knots.sort_by(f64::total_cmp);

    let angle = |os: f64| prev.attitude.angle_to(&task.attitude_unchecked(os));
    let mut splits = Vec::new();
    for w in knots.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (g0, g1) = (angle(x0), angle(x1));
        if g0 == g1 {
            continue;
        }
        for &theta in jumps {
            let crosses = (g0 < theta && theta <= g1) || (g1 < theta && theta <= g0);
            if crosses {
                let x = x0 + (theta - g0) / (g1 - g0) * (x1 - x0);
                if x > l && x < r {
                    splits.push(x);
                }
            }
        }
    }
    splits.sort_by(f64::total_cmp);
    splits.dedup();
    splits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AttitudeProfile;

    fn constant(ws: f64, we: f64, du: f64) -> Task {
        Task {
            id: 0,
            ws,
            we,
            du,
            expected_profit: 1.0,
            profile: AttitudeProfile::constant(Attitude::ZERO),
        }
    }

    fn prev_at(end: f64) -> Predecessor {
        Predecessor {
            end,
            attitude: Attitude::ZERO,
        }
    }

    /// First grid point (step 1e-3 from l, plus r itself) with non-positive delay.
    fn scan(model: &TransitionModel, prev: &Predecessor, task: &Task) -> Option<f64> {
        let l = task.ws.max(prev.end);
        let r = task.we - task.du;
        let mut k = 0u64;
        loop {
            let os = l + k as f64 * 1e-3;
            if os > r {
                break;
            }
            if delay(model, prev, task, os) <= 0.0 {
                return Some(os);
            }
            k += 1;
        }
        (delay(model, prev, task, r) <= 0.0).then_some(r)
    }

    #[test]
    fn delay_hand_values() {
        let m = TransitionModel::standard();
        let task = constant(0.0, 500.0, 10.0);
        let prev = prev_at(100.0);
        assert_eq!(delay(&m, &prev, &task, 105.0), 0.0);
        assert_eq!(delay(&m, &prev, &task, 110.0), -5.0);
        assert_eq!(delay(&m, &prev, &task, 102.0), 3.0);
    }

    #[test]
    fn constant_attitudes_start_after_minimum_maneuver() {
        let m = TransitionModel::standard();
        let got = earliest_start(&m, &prev_at(100.0), &constant(50.0, 300.0, 25.0)).unwrap();
        let oracle = scan(&m, &prev_at(100.0), &constant(50.0, 300.0, 25.0)).unwrap();
        assert!((got - 105.0).abs() <= 1e-3, "{got}");
        assert!((got - oracle).abs() <= 1e-3);
        assert!(got >= 105.0);
    }

    #[test]
    fn empty_bracket_has_no_start() {
        let m = TransitionModel::standard();
        let out = earliest_start_counted(&m, &prev_at(100.0), &constant(50.0, 100.0, 60.0));
        assert_eq!(out.start, None);
        assert_eq!(out.evaluations, 0);
    }

    #[test]
    fn window_too_late_to_finish_has_no_start() {
        let m = TransitionModel::standard();
        // must start by 103 but the maneuver needs until 105
        assert_eq!(earliest_start(&m, &prev_at(100.0), &constant(0.0, 113.0, 10.0)), None);
    }

    #[test]
    fn time_varying_profile_matches_scan() {
        let m = TransitionModel::standard();
        let task = Task {
            id: 0,
            ws: 100.0,
            we: 220.0,
            du: 20.0,
            expected_profit: 1.0,
            profile: AttitudeProfile::linear(
                Attitude::new(27.0, 10.0, 0.0),
                Attitude::new(-27.0, 10.0, 0.0),
                120.0,
            ),
        };
        let prev = Predecessor {
            end: 90.0,
            attitude: Attitude::new(-20.0, -15.0, 0.0),
        };
        let l = 100.0;
        assert!(delay(&m, &prev, &task, l) > 0.0);
        assert!(delay(&m, &prev, &task, 200.0) < 0.0);
        let got = earliest_start(&m, &prev, &task).unwrap();
        let oracle = scan(&m, &prev, &task).unwrap();
        assert!((got - oracle).abs() <= 1e-3, "{got} vs {oracle}");
        assert!(delay(&m, &prev, &task, got) <= 0.0);
    }

    #[test]
    fn upward_jump_keeps_earliest_zero() {
        // The angle decreases through 15 deg, where the maneuver time jumps from 17.5 s
        // up to 20 s; the first feasible start lies just before the jump.
        let m = TransitionModel::standard();
        let task = Task {
            id: 0,
            ws: 0.0,
            we: 200.0,
            du: 10.0,
            expected_profit: 1.0,
            profile: AttitudeProfile::linear(
                Attitude::new(27.0, 0.0, 0.0),
                Attitude::new(-27.0, 0.0, 0.0),
                60.0,
            ),
        };
        let prev = Predecessor {
            end: 2.0,
            attitude: Attitude::new(0.0, 0.0, 0.0),
        };
        let got = earliest_start(&m, &prev, &task).unwrap();
        let oracle = scan(&m, &prev, &task).unwrap();
        assert!((got - oracle).abs() <= 1e-3, "{got} vs {oracle}");
    }

    #[test]
    fn evaluation_count_bound_without_splits() {
        let m = TransitionModel::standard();
        let prev = prev_at(100.0);
        let task = constant(50.0, 300.0, 25.0);
        let out = earliest_start_counted(&m, &prev, &task);
        let (l, r) = (100.0_f64, 275.0_f64);
        let bound = ((r - l) / SEARCH_TOLERANCE).log2().ceil() as usize + 2;
        assert!(out.evaluations <= bound, "{} > {bound}", out.evaluations);
    }
}
