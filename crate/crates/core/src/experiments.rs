//! Comparison protocol: baselines and evolved policies on the same test cases, Gap
//! tables, and cumulative-profit trajectories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{best_lah, evaluate_specs, BaselineKind, BaselineSpec, SweepEntry};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig, GenerationRecord};
use crate::instance_gen::{derive_seed, CellData, Profile, ScenarioFilter, Split};
use crate::model::{EnvironmentRealization, Instance, Schedule};
use crate::policy::PolicyTree;
use crate::simulator::{mean_profit, rollout, Policy};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Relative improvement of `a` over `b`.
pub fn gap(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::UndefinedGap);
    }
    Ok((a - b) / b)
}

/// Resolved parameters of one command invocation, stored beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub profile: Profile,
    pub seed: u64,
    pub filter: ScenarioFilter,
    pub gphh_seeds: usize,
    pub evolution: EvolutionConfig,
    pub bench_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// Writes `run_config.json` into `dir`, refusing to replace an existing one.
pub fn write_run_config(dir: &Path, config: &RunConfig) -> Result<()> {
    let path = dir.join(RUN_CONFIG_FILE);
    if path.exists() {
        return Err(Error::PathExists(path));
    }
    fs::create_dir_all(dir)?;
    fs::write(path, serde_json::to_string_pretty(config)?)?;
    Ok(())
}

/// Seed of GPHH run `index` on a cell.
pub fn gphh_seed(run_seed: u64, cell_seed: u64, index: usize) -> u64 {
    derive_seed(run_seed ^ cell_seed, index as u64)
}

#[derive(Debug, Clone)]
pub struct GphhRun {
    pub seed: u64,
    pub policy: PolicyTree,
    pub validation_profit: f64,
    pub test_profit: f64,
    pub history: Vec<GenerationRecord>,
}

/// Evolves one policy per seed on the cell's training cases and scores it on the test cases.
pub fn train_cell(cell: &CellData, config: &EvolutionConfig, seeds: &[u64]) -> Result<Vec<GphhRun>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = EvolutionConfig { seed, ..config.clone() };
            let result = evolve(&cell.train, &cell.valid, &cfg, |_, _| {})?;
            let test_profit = mean_profit(&result.best, &cell.test, cfg.slack_m);
            log::info!(
                "cell {} seed {seed}: validation {:.2}, test {test_profit:.2}",
                cell.id(),
                result.best_validation
            );
            Ok(GphhRun {
                seed,
                policy: result.best,
                validation_profit: result.best_validation,
                test_profit,
                history: result.history,
            })
        })
        .collect()
}

/// One row of the per-cell comparison table. Gaps are blank when the reference is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: String,
    pub nt: usize,
    pub st: u32,
    pub mmc: u32,
    pub prob_cloud: f64,
    pub lah_variant: BaselineKind,
    pub lah_k: Option<usize>,
    pub lah_profit: f64,
    pub mdh1_profit: f64,
    pub mdh2_profit: f64,
    pub mdh3_profit: f64,
    pub mdh_best_profit: f64,
    pub gphh_runs: usize,
    pub gphh_best_profit: f64,
    pub gphh_mean_profit: f64,
    pub gphh_worst_profit: f64,
    pub gap_lah_best: Option<f64>,
    pub gap_lah_mean: Option<f64>,
    pub gap_lah_worst: Option<f64>,
    pub gap_mdh_best: Option<f64>,
    pub gap_mdh_mean: Option<f64>,
    pub gap_mdh_worst: Option<f64>,
}

impl CellReport {
    /// Whether the best evolved policy matches or beats both baseline families.
    pub fn gphh_at_least_baselines(&self) -> bool {
        self.gphh_best_profit >= self.lah_profit && self.gphh_best_profit >= self.mdh_best_profit
    }
}

/// A rollout on a stored case, kept for later re-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub cell: String,
    pub split: Split,
    pub case: usize,
    pub method: String,
    pub schedule: Schedule,
}

#[derive(Debug, Clone)]
pub struct CellComparison {
    pub report: CellReport,
    pub lah_sweep: Vec<SweepEntry>,
    pub mdh: Vec<SweepEntry>,
    pub runs: Vec<GphhRun>,
    /// Index into `runs` of the run with the highest test profit.
    pub best_run: usize,
    pub schedules: Vec<ScheduleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub evolution: EvolutionConfig,
    pub gphh_seeds: usize,
    pub run_seed: u64,
}

fn record_schedules(cell: &CellData, method: &str, policy: &dyn Policy, slack_m: f64) -> Vec<ScheduleRecord> {
    cell.test
        .iter()
        .enumerate()
        .map(|(i, c)| ScheduleRecord {
            cell: cell.id(),
            split: Split::Test,
            case: i,
            method: method.to_string(),
            schedule: rollout(&c.instance, &c.env, policy, slack_m).schedule,
        })
        .collect()
}

/// Runs the LAH sweep, the three MDH rules and `gphh_seeds` GPHH runs on one cell.
/// Among GPHH runs the one with the highest test profit is reported as best.
pub fn compare_cell(cell: &CellData, config: &CompareConfig) -> Result<CellComparison> {
    if config.gphh_seeds == 0 {
        return Err(Error::Config("at least one GPHH seed is required".into()));
    }
    let slack_m = config.evolution.slack_m;
    let lah = best_lah(&cell.test, slack_m);
    let mdh = evaluate_specs(&BaselineSpec::mdh_all(), &cell.test, slack_m);
    let seeds: Vec<u64> = (0..config.gphh_seeds)
        .map(|i| gphh_seed(config.run_seed, cell.config.seed, i))
        .collect();
    let runs = train_cell(cell, &config.evolution, &seeds)?;

    let profits: Vec<f64> = runs.iter().map(|r| r.test_profit).collect();
    let mut best_run = 0;
    for (i, &p) in profits.iter().enumerate() {
        if p > profits[best_run] {
            best_run = i;
        }
    }
    let best = profits[best_run];
    let worst = profits.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = profits.iter().sum::<f64>() / profits.len() as f64;
    let mdh_best = mdh.iter().map(|e| e.expected_profit).fold(f64::NEG_INFINITY, f64::max);
    let lah_profit = lah.best.expected_profit;

    let c = cell.config;
    let report = CellReport {
        cell: cell.id(),
        nt: c.nt,
        st: c.st,
        mmc: c.mmc,
        prob_cloud: c.prob_cloud,
        lah_variant: lah.best.spec.kind(),
        lah_k: lah.best.spec.lookahead(),
        lah_profit,
        mdh1_profit: mdh[0].expected_profit,
        mdh2_profit: mdh[1].expected_profit,
        mdh3_profit: mdh[2].expected_profit,
        mdh_best_profit: mdh_best,
        gphh_runs: runs.len(),
        gphh_best_profit: best,
        gphh_mean_profit: mean,
        gphh_worst_profit: worst,
        gap_lah_best: gap(best, lah_profit).ok(),
        gap_lah_mean: gap(mean, lah_profit).ok(),
        gap_lah_worst: gap(worst, lah_profit).ok(),
        gap_mdh_best: gap(best, mdh_best).ok(),
        gap_mdh_mean: gap(mean, mdh_best).ok(),
        gap_mdh_worst: gap(worst, mdh_best).ok(),
    };

    let mut schedules = record_schedules(cell, "GPHH", &runs[best_run].policy, slack_m);
    schedules.extend(record_schedules(cell, &lah.best.spec.to_string(), &lah.best.spec, slack_m));
    for e in &mdh {
        schedules.extend(record_schedules(cell, &e.spec.to_string(), &e.spec, slack_m));
    }

    Ok(CellComparison {
        report,
        lah_sweep: lah.sweep,
        mdh,
        runs,
        best_run,
        schedules,
    })
}

/// Totals per scope with Gaps on the totals, plus the mean of per-cell Gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// `nt=<n>` for one task scale, `all` for every cell.
    pub scope: String,
    pub cells: usize,
    pub lah_total: f64,
    pub mdh_total: f64,
    pub gphh_best_total: f64,
    pub gphh_mean_total: f64,
    pub gphh_worst_total: f64,
    pub total_gap_lah: Option<f64>,
    pub total_gap_mdh: Option<f64>,
    pub mean_gap_lah_best: Option<f64>,
    pub mean_gap_lah_mean: Option<f64>,
    pub mean_gap_lah_worst: Option<f64>,
    pub mean_gap_mdh_best: Option<f64>,
    pub mean_gap_mdh_mean: Option<f64>,
    pub mean_gap_mdh_worst: Option<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

fn aggregate_rows(scope: String, rows: &[&CellReport]) -> AggregateRow {
    let total = |f: fn(&CellReport) -> f64| rows.iter().map(|r| f(r)).sum::<f64>();
    let lah_total = total(|r| r.lah_profit);
    let mdh_total = total(|r| r.mdh_best_profit);
    let gphh_best_total = total(|r| r.gphh_best_profit);
    let mean_gap = |f: fn(&CellReport) -> Option<f64>| mean_defined(rows.iter().map(|r| f(r)));
    AggregateRow {
        scope,
        cells: rows.len(),
        lah_total,
        mdh_total,
        gphh_best_total,
        gphh_mean_total: total(|r| r.gphh_mean_profit),
        gphh_worst_total: total(|r| r.gphh_worst_profit),
        total_gap_lah: gap(gphh_best_total, lah_total).ok(),
        total_gap_mdh: gap(gphh_best_total, mdh_total).ok(),
        mean_gap_lah_best: mean_gap(|r| r.gap_lah_best),
        mean_gap_lah_mean: mean_gap(|r| r.gap_lah_mean),
        mean_gap_lah_worst: mean_gap(|r| r.gap_lah_worst),
        mean_gap_mdh_best: mean_gap(|r| r.gap_mdh_best),
        mean_gap_mdh_mean: mean_gap(|r| r.gap_mdh_mean),
        mean_gap_mdh_worst: mean_gap(|r| r.gap_mdh_worst),
    }
}

/// One row per task scale present, in ascending order, followed by an `all` row.
pub fn aggregate(reports: &[CellReport]) -> Vec<AggregateRow> {
    let mut scales: Vec<usize> = reports.iter().map(|r| r.nt).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut out: Vec<AggregateRow> = scales
        .into_iter()
        .map(|nt| {
            let rows: Vec<&CellReport> = reports.iter().filter(|r| r.nt == nt).collect();
            aggregate_rows(format!("nt={nt}"), &rows)
        })
        .collect();
    out.push(aggregate_rows("all".into(), &reports.iter().collect::<Vec<_>>()));
    out
}

pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub policy: String,
    pub t_s: f64,
    pub cumulative_profit: f64,
}

/// Cumulative profit of each policy on one case: a point at time 0, then one at the
/// end of every observation.
pub fn export_trajectory(
    instance: &Instance,
    env: &EnvironmentRealization,
    policies: &[(String, &dyn Policy)],
    slack_m: f64,
) -> Vec<TrajectoryPoint> {
    let mut out = Vec::new();
    for (name, policy) in policies {
        let outcome = rollout(instance, env, *policy, slack_m);
        out.push(TrajectoryPoint {
            policy: name.clone(),
            t_s: 0.0,
            cumulative_profit: 0.0,
        });
        for (obs, rec) in outcome.schedule.observations.iter().zip(&outcome.trace) {
            out.push(TrajectoryPoint {
                policy: name.clone(),
                t_s: obs.end,
                cumulative_profit: rec.cumulative_profit,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_arithmetic() {
        assert!((gap(105.0, 100.0).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(gap(100.0, 100.0).unwrap(), 0.0);
        assert!(matches!(gap(1.0, 0.0), Err(Error::UndefinedGap)));
    }

    fn report(nt: usize, lah: f64, mdh: f64, best: f64) -> CellReport {
        CellReport {
            cell: format!("{nt}_2000_1024_0.2"),
            nt,
            st: 2000,
            mmc: 1024,
            prob_cloud: 0.2,
            lah_variant: BaselineKind::Lah1,
            lah_k: None,
            lah_profit: lah,
            mdh1_profit: mdh,
            mdh2_profit: mdh,
            mdh3_profit: mdh,
            mdh_best_profit: mdh,
            gphh_runs: 1,
            gphh_best_profit: best,
            gphh_mean_profit: best,
            gphh_worst_profit: best,
            gap_lah_best: gap(best, lah).ok(),
            gap_lah_mean: gap(best, lah).ok(),
            gap_lah_worst: gap(best, lah).ok(),
            gap_mdh_best: gap(best, mdh).ok(),
            gap_mdh_mean: gap(best, mdh).ok(),
            gap_mdh_worst: gap(best, mdh).ok(),
        }
    }

    #[test]
    fn aggregate_totals_and_means() {
        let rows = vec![report(50, 100.0, 80.0, 110.0), report(50, 200.0, 100.0, 200.0), report(100, 10.0, 10.0, 12.0)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 3);
        assert_eq!(agg[0].scope, "nt=50");
        assert_eq!(agg[0].lah_total, 300.0);
        assert!((agg[0].total_gap_lah.unwrap() - 10.0 / 300.0).abs() < 1e-12);
        assert!((agg[0].mean_gap_lah_best.unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(agg[2].scope, "all");
        assert_eq!(agg[2].cells, 3);
        assert!(rows[0].gphh_at_least_baselines());
        assert!(rows[1].gphh_at_least_baselines());
    }

    #[test]
    fn run_config_is_not_overwritten() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            command: "train".into(),
            version: "0".into(),
            profile: Profile::Desk,
            seed: 1,
            filter: "nt=50".parse().unwrap(),
            gphh_seeds: 3,
            evolution: EvolutionConfig::default(),
            bench_dir: None,
            out_dir: dir.path().to_path_buf(),
        };
        write_run_config(dir.path(), &cfg).unwrap();
        let back: RunConfig =
            serde_json::from_str(&fs::read_to_string(dir.path().join(RUN_CONFIG_FILE)).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(write_run_config(dir.path(), &cfg).is_err());
    }
}
