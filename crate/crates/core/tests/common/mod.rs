#![allow(dead_code)]

use rand::Rng;
use satsched::instance_gen::{generate_tasks, ATTITUDE_LIMIT_DEG, EXPECTED_RATE};
use satsched::model::{Attitude, AttitudeBounds, Instance, Task, TransitionModel};
use satsched::simulator::{earliest_start, DecisionView, Policy, Predecessor};

/// Maneuver time written out from the four-row table.
pub fn table_time(angle: f64) -> f64 {
    if angle < 15.0 {
        5.0 + angle / 1.0
    } else if angle < 40.0 {
        10.0 + angle / 2.0
    } else if angle < 90.0 {
        16.0 + angle / 2.5
    } else {
        22.0 + angle / 3.0
    }
}

pub fn l1(a: &Attitude, b: &Attitude) -> f64 {
    (a.pitch - b.pitch).abs() + (a.roll - b.roll).abs() + (a.yaw - b.yaw).abs()
}

pub fn oracle_delay(prev_end: f64, prev_att: &Attitude, task: &Task, os: f64) -> f64 {
    let att = Attitude::new(
        task.profile.start.pitch + task.profile.rate.pitch * (os - task.ws),
        task.profile.start.roll + task.profile.rate.roll * (os - task.ws),
        task.profile.start.yaw + task.profile.rate.yaw * (os - task.ws),
    );
    prev_end + table_time(l1(prev_att, &att)) - os
}

/// First start on a 1 ms grid from `max(ws, prev_end)` (plus the latest start itself)
/// whose delay is non-positive.
pub fn scan_earliest(prev_end: f64, prev_att: &Attitude, task: &Task) -> Option<f64> {
    let lo = task.ws.max(prev_end);
    let hi = task.we - task.du;
    if hi < lo {
        return None;
    }
    let steps = ((hi - lo) / 1e-3).floor() as u64;
    for k in 0..=steps {
        let os = lo + k as f64 * 1e-3;
        if oracle_delay(prev_end, prev_att, task, os) <= 0.0 {
            return Some(os);
        }
    }
    (oracle_delay(prev_end, prev_att, task, hi) <= 0.0).then_some(hi)
}

/// Instance with windows packed into a short horizon so that choices interact.
pub fn small_instance<R: Rng>(rng: &mut R, nt: usize, horizon: f64, mmc: f64) -> Instance {
    Instance::new(
        generate_tasks(nt, horizon, rng),
        horizon,
        mmc,
        EXPECTED_RATE,
        TransitionModel::standard(),
        AttitudeBounds::symmetric(ATTITUDE_LIMIT_DEG),
    )
    .unwrap()
}

/// Fixed priority over task ids: earlier in `order` wins.
pub struct PriorityOrder {
    rank: Vec<usize>,
}

impl PriorityOrder {
    pub fn new(order: &[usize]) -> Self {
        let mut rank = vec![0; order.len()];
        for (r, &id) in order.iter().enumerate() {
            rank[id] = r;
        }
        Self { rank }
    }
}

impl Policy for PriorityOrder {
    fn select(&self, view: &DecisionView<'_>) -> usize {
        (0..view.candidates.len())
            .min_by_key(|&i| self.rank[view.candidates[i].task])
            .unwrap()
    }
}

/// Deterministic-world simulation of "always take the first schedulable task in
/// `order`", written without the rollout machinery.
pub fn simulate_order(inst: &Instance, order: &[usize]) -> (f64, Vec<usize>) {
    let rate = inst.expected_rate();
    let mut retired = vec![false; inst.len()];
    let mut taken = vec![false; inst.len()];
    let mut prev = Predecessor::INITIAL;
    let mut mem = inst.mmc();
    let mut profit = 0.0;
    let mut seq = Vec::new();
    loop {
        let mut pick = None;
        for &id in order {
            if taken[id] || retired[id] {
                continue;
            }
            let t = inst.task(id);
            if prev.end + t.du > t.we || rate * t.du > mem {
                retired[id] = true;
                continue;
            }
            if let Some(s) = earliest_start(inst.transition(), &prev, t) {
                pick = Some((id, s));
                break;
            }
        }
        let Some((id, s)) = pick else { break };
        let t = inst.task(id);
        taken[id] = true;
        seq.push(id);
        profit += t.expected_profit;
        mem -= rate * t.du;
        prev = Predecessor::after(t, s + t.du);
    }
    (profit, seq)
}

/// Best total profit over every feasible observation sequence, each task placed at
/// its earliest feasible start after the previous one.
pub fn brute_force(inst: &Instance) -> f64 {
    // profit accumulates in observation order so sums round exactly like a rollout
    fn go(inst: &Instance, used: &mut Vec<bool>, prev: Predecessor, mem: f64, acc: f64) -> f64 {
        let mut best = acc;
        for id in 0..inst.len() {
            if used[id] {
                continue;
            }
            let t = inst.task(id);
            let need = inst.expected_rate() * t.du;
            if need > mem {
                continue;
            }
            let Some(s) = earliest_start(inst.transition(), &prev, t) else { continue };
            used[id] = true;
            let v = go(inst, used, Predecessor::after(t, s + t.du), mem - need, acc + t.expected_profit);
            used[id] = false;
            best = best.max(v);
        }
        best
    }
    go(inst, &mut vec![false; inst.len()], Predecessor::INITIAL, inst.mmc(), 0.0)
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
