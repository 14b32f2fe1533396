//! Look-ahead and hand-written dispatching rules, run through the same rollout as
//! evolved policies.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{mean_profit, select_max, Case, DecisionView, Policy};

pub const MIN_LOOKAHEAD: usize = 2;
pub const MAX_LOOKAHEAD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "LAH1")]
    Lah1,
    #[serde(rename = "LAH2")]
    Lah2,
    #[serde(rename = "LAH3")]
    Lah3,
    #[serde(rename = "MDH1")]
    Mdh1,
    #[serde(rename = "MDH2")]
    Mdh2,
    #[serde(rename = "MDH3")]
    Mdh3,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Lah1,
        BaselineKind::Lah2,
        BaselineKind::Lah3,
        BaselineKind::Mdh1,
        BaselineKind::Mdh2,
        BaselineKind::Mdh3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Lah1 => "LAH1",
            BaselineKind::Lah2 => "LAH2",
            BaselineKind::Lah3 => "LAH3",
            BaselineKind::Mdh1 => "MDH1",
            BaselineKind::Mdh2 => "MDH2",
            BaselineKind::Mdh3 => "MDH3",
        }
    }

    pub fn takes_lookahead(self) -> bool {
        matches!(self, BaselineKind::Lah2 | BaselineKind::Lah3)
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown baseline '{s}'")))
    }
}

/// A baseline rule with its look-ahead step where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaselineSpec {
    kind: BaselineKind,
    k: Option<usize>,
}

impl BaselineSpec {
    /// `k` must be given for LAH2/LAH3 (within 2..=20) and omitted otherwise.
    pub fn new(kind: BaselineKind, k: Option<usize>) -> Result<Self> {
        match (kind.takes_lookahead(), k) {
            (true, Some(k)) if (MIN_LOOKAHEAD..=MAX_LOOKAHEAD).contains(&k) => {}
            (true, Some(k)) => {
                return Err(Error::Config(format!(
                    "look-ahead {k} outside {MIN_LOOKAHEAD}..={MAX_LOOKAHEAD}"
                )))
            }
            (true, None) => return Err(Error::Config(format!("{kind} needs a look-ahead step"))),
            (false, Some(_)) => return Err(Error::Config(format!("{kind} takes no look-ahead step"))),
            (false, None) => {}
        }
        Ok(Self { kind, k })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn lookahead(&self) -> Option<usize> {
        self.k
    }

    /// LAH1, then LAH2 and LAH3 for every step in 2..=20.
    pub fn lah_sweep() -> Vec<BaselineSpec> {
        let mut out = vec![BaselineSpec { kind: BaselineKind::Lah1, k: None }];
        for kind in [BaselineKind::Lah2, BaselineKind::Lah3] {
            out.extend((MIN_LOOKAHEAD..=MAX_LOOKAHEAD).map(|k| BaselineSpec { kind, k: Some(k) }));
        }
        out
    }

    pub fn mdh_all() -> [BaselineSpec; 3] {
        [BaselineKind::Mdh1, BaselineKind::Mdh2, BaselineKind::Mdh3].map(|kind| BaselineSpec { kind, k: None })
    }
}

impl fmt::Display for BaselineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            Some(k) => write!(f, "{}(k={k})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl Policy for BaselineSpec {
    fn select(&self, view: &DecisionView<'_>) -> usize {
        match self.kind {
            BaselineKind::Lah1 => lah_choose(view, LahRule::Nearest, 1),
            BaselineKind::Lah2 => lah_choose(view, LahRule::Profit, self.k.unwrap_or(1)),
            BaselineKind::Lah3 => lah_choose(view, LahRule::Density, self.k.unwrap_or(1)),
            kind => select_max(view, |i| mdh_score(view, i, kind)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LahRule {
    /// Earliest feasible start.
    Nearest,
    /// Highest actual profit.
    Profit,
    /// Highest actual profit per second of imaging.
    Density,
}

/// Look-ahead rule with an arbitrary window, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookahead {
    pub rule: LahRule,
    pub k: usize,
}

impl Policy for Lookahead {
    fn select(&self, view: &DecisionView<'_>) -> usize {
        lah_choose(view, self.rule, self.k)
    }
}

/// Candidate index picked by a look-ahead rule from the `k` candidates with the
/// earliest feasible starts. Ties go to the earlier start, then the smaller task id, so
/// a rule that cannot discriminate falls back to LAH1's choice.
pub fn lah_choose(view: &DecisionView<'_>, rule: LahRule, k: usize) -> usize {
    let cands = view.candidates;
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        cands[a]
            .earliest_start
            .total_cmp(&cands[b].earliest_start)
            .then(cands[a].task.cmp(&cands[b].task))
    });
    let window = &order[..k.max(1).min(order.len())];
    let score = |i: usize| {
        let id = cands[i].task;
        match rule {
            LahRule::Nearest => 0.0,
            LahRule::Profit => view.env.actual_profit[id],
            LahRule::Density => view.env.actual_profit[id] / view.instance.task(id).du,
        }
    };
    let mut best = window[0];
    for &i in &window[1..] {
        if score(i) > score(best) {
            best = i;
        }
    }
    best
}

/// Score (larger is better) of candidate `i` under an MDH rule.
pub fn mdh_score(view: &DecisionView<'_>, i: usize, kind: BaselineKind) -> f64 {
    let c = view.candidates[i];
    let task = view.instance.task(c.task);
    let prev = &view.ctx.prev;
    let trans = view
        .instance
        .transition_time(&prev.attitude, &task.attitude_unchecked(c.earliest_start));
    let density = || view.env.actual_profit[c.task] / (task.du + trans);
    let nearest = || -trans.max(c.earliest_start - prev.end);
    match kind {
        BaselineKind::Mdh1 => density(),
        BaselineKind::Mdh2 => nearest(),
        BaselineKind::Mdh3 if view.ctx.remaining_memory < view.instance.mmc() / 2.0 => density(),
        BaselineKind::Mdh3 => nearest(),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub spec: BaselineSpec,
    pub expected_profit: f64,
}

/// Evaluates every spec on `cases`, preserving order.
pub fn evaluate_specs(specs: &[BaselineSpec], cases: &[Case], slack_m: f64) -> Vec<SweepEntry> {
    specs
        .par_iter()
        .map(|&spec| SweepEntry {
            spec,
            expected_profit: mean_profit(&spec, cases, slack_m),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestLah {
    pub best: SweepEntry,
    pub sweep: Vec<SweepEntry>,
}

/// Runs the whole LAH sweep and keeps the best; ties go to the earlier sweep entry.
pub fn best_lah(cases: &[Case], slack_m: f64) -> BestLah {
    let sweep = evaluate_specs(&BaselineSpec::lah_sweep(), cases, slack_m);
    let mut best = sweep[0].clone();
    for e in &sweep[1..] {
        if e.expected_profit > best.expected_profit {
            best = e.clone();
        }
    }
    BestLah { best, sweep }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub scenario: String,
    pub variant: BaselineKind,
    pub k: Option<usize>,
    pub expected_profit: f64,
}

/// CSV with header `scenario,variant,k,expected_profit`; `k` is empty when unused.
pub fn write_baselines_csv<W: Write>(writer: W, rows: &[BaselineRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
