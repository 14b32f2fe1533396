use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use crate::simulator::DecisionView;

/// Small constant keeping the imaging-start-time ratio defined at `t_now = T`.
pub const TIST_EPSILON: f64 = 1e-6;

/// Terminal features a policy tree can read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    /// Realized profit, min-max normalized over the pool.
    Rp,
    /// Realized profit per second of imaging, min-max normalized.
    Rppu,
    /// Expected memory consumption, min-max normalized.
    Emc,
    /// Expected memory consumption over remaining memory.
    Emo,
    /// Remaining memory over capacity.
    Rmp,
    /// Current time over horizon.
    Ct,
    /// Time until the earliest start relative to the time left in the horizon.
    Tist,
    /// Candidate count over task count.
    Rtp,
    /// Window-start rank among all tasks over task count.
    Fr,
    /// Window-start rank within the candidate pool over pool size.
    Rr,
}

impl Feature {
    pub const COUNT: usize = 10;

    pub const ALL: [Feature; Feature::COUNT] = [
        Feature::Rp,
        Feature::Rppu,
        Feature::Emc,
        Feature::Emo,
        Feature::Rmp,
        Feature::Ct,
        Feature::Tist,
        Feature::Rtp,
        Feature::Fr,
        Feature::Rr,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Feature::Rp => "RP",
            Feature::Rppu => "RPPU",
            Feature::Emc => "EMC",
            Feature::Emo => "EMO",
            Feature::Rmp => "RMP",
            Feature::Ct => "CT",
            Feature::Tist => "TIST",
            Feature::Rtp => "RTP",
            Feature::Fr => "FR",
            Feature::Rr => "RR",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Feature {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Feature::ALL
            .into_iter()
            .find(|f| f.symbol() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; Feature::COUNT]);

impl Index<Feature> for FeatureVector {
    type Output = f64;

    #[inline]
    fn index(&self, f: Feature) -> &f64 {
        &self.0[f as usize]
    }
}

impl FeatureVector {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Maps `values` onto `[0, 1]`; a pool without spread maps to 0.5 everywhere.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let spread = hi - lo;
    if spread.is_nan() || spread <= 0.0 {
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - lo) / spread).collect()
}

/// Feature vectors for every candidate in the view, in candidate order.
pub fn compute_features(view: &DecisionView<'_>) -> Vec<FeatureVector> {
    let cands = view.candidates;
    if cands.is_empty() {
        return Vec::new();
    }
    let inst = view.instance;
    let ctx = view.ctx;
    let rate = inst.expected_rate();

    let profit: Vec<f64> = cands.iter().map(|c| view.env.actual_profit[c.task]).collect();
    let density: Vec<f64> = cands
        .iter()
        .zip(&profit)
        .map(|(c, p)| p / inst.task(c.task).du)
        .collect();
    let memory: Vec<f64> = cands.iter().map(|c| rate * inst.task(c.task).du).collect();
    let (rp, rppu, emc) = (min_max(&profit), min_max(&density), min_max(&memory));

    let n_total = ctx.tasks_total as f64;
    let n_pool = cands.len() as f64;
    let rmp = ctx.remaining_memory / inst.mmc();
    let ct = ctx.t_now / ctx.horizon;
    let rtp = n_pool / n_total;
    let time_left = ctx.horizon - ctx.t_now + TIST_EPSILON;

    cands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let emo = memory[i] / ctx.remaining_memory;
            let tist = (c.earliest_start - ctx.t_now + TIST_EPSILON) / time_left;
            let fr = inst.full_rank(c.task) as f64 / n_total;
            // candidates keep pool order, which is ascending by window start
            let rr = (i + 1) as f64 / n_pool;
            FeatureVector([rp[i], rppu[i], emc[i], emo, rmp, ct, tist, rtp, fr, rr])
        })
        .collect()
}
