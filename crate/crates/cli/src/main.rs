use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::warn;

use satsched::baselines::{best_lah, evaluate_specs, write_baselines_csv, BaselineRow, BaselineSpec};
use satsched::evolution::{write_history_csv, EvolutionConfig};
use satsched::experiments::{
    aggregate, compare_cell, export_trajectory, gphh_seed, train_cell, write_csv, write_run_config, CompareConfig,
    RunConfig, ScheduleRecord,
};
use satsched::instance_gen::{
    generate_benchmark, load_cell, read_manifest, CellData, Manifest, Profile, ScenarioFilter,
};
use satsched::model::{validate_schedule, ConstraintTag};
use satsched::policy::{read_policy_file, write_policy_file, PolicyTree};
use satsched::simulator::Policy;

#[derive(Parser)]
#[command(name = "satsched", version, about = "Evolve and compare satellite scheduling policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master or run seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Cell selection, e.g. `nt=50,mmc=1024|2048` (keys: nt, st, mmc, cloud).
    #[arg(long, default_value = "")]
    filter: ScenarioFilter,
}

#[derive(Args, Clone)]
struct EvoArgs {
    /// Independent GPHH runs per cell [default: 5 for full, 3 for desk].
    #[arg(long)]
    gphh_seeds: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Mini-batches per training set [default: training instances / 5].
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Memory slack factor used by the capacity filter.
    #[arg(long, default_value_t = 1.0)]
    slack_m: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a benchmark directory.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "desk")]
        profile: Profile,
    },
    /// Evolve policies for every selected cell.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bench: PathBuf,
        #[command(flatten)]
        evo: EvoArgs,
    },
    /// Run the LAH sweep and MDH rules on the test sets.
    Baselines {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bench: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        slack_m: f64,
    },
    /// Baselines plus GPHH on every selected cell, with Gap tables.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bench: PathBuf,
        #[command(flatten)]
        evo: EvoArgs,
    },
    /// Cumulative-profit series of several policies on one test case.
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bench: PathBuf,
        /// Test case index within each selected cell.
        #[arg(long, default_value_t = 0)]
        case: usize,
        /// Policy file whose trees are added as GPHH series.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        slack_m: f64,
    },
    /// Re-check stored schedules against every constraint.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bench: PathBuf,
        /// A schedules.json written by `compare`.
        #[arg(long)]
        schedules: PathBuf,
    },
}

fn run_config(command: &str, common: &Common, profile: Profile, bench: Option<&Path>, evolution: EvolutionConfig, gphh_seeds: usize) -> RunConfig {
    RunConfig {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        profile,
        seed: common.seed,
        filter: common.filter.clone(),
        gphh_seeds,
        evolution,
        bench_dir: bench.map(Path::to_path_buf),
        out_dir: common.out.clone(),
    }
}

fn evolution_config(evo: &EvoArgs, manifest: &Manifest) -> EvolutionConfig {
    let d = EvolutionConfig::default();
    EvolutionConfig {
        population_size: evo.population.unwrap_or(d.population_size),
        generations: evo.generations.unwrap_or(d.generations),
        overall_max_depth: evo.max_depth.unwrap_or(d.overall_max_depth),
        batches: evo.batches.unwrap_or((manifest.counts.train / 5).max(1)),
        slack_m: evo.slack_m,
        ..d
    }
}

/// Loads the selected cells, warning about and skipping unreadable ones.
fn selected_cells<'a>(bench: &'a Path, manifest: &'a Manifest, filter: &'a ScenarioFilter) -> impl Iterator<Item = Option<CellData>> + 'a {
    manifest
        .cells
        .iter()
        .filter(move |c| filter.matches(&c.config))
        .map(move |c| match load_cell(bench, c) {
            Ok(data) => Some(data),
            Err(e) => {
                warn!("skipping cell {}: {e}", c.id());
                None
            }
        })
}

fn csv_file(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_gen(common: &Common, profile: Profile) -> Result<bool> {
    let manifest = generate_benchmark(&common.out, common.seed, profile, &common.filter)?;
    write_run_config(&common.out, &run_config("gen", common, profile, None, EvolutionConfig::default(), profile.gphh_seeds()))?;
    println!("wrote {} cells to {}", manifest.cells.len(), common.out.display());
    Ok(true)
}

fn cmd_train(common: &Common, bench: &Path, evo: &EvoArgs) -> Result<bool> {
    let manifest = read_manifest(bench)?;
    let cfg = evolution_config(evo, &manifest);
    let n_seeds = evo.gphh_seeds.unwrap_or(manifest.profile.gphh_seeds());
    write_run_config(&common.out, &run_config("train", common, manifest.profile, Some(bench), cfg.clone(), n_seeds))?;
    let mut complete = true;
    for cell in selected_cells(bench, &manifest, &common.filter) {
        let Some(cell) = cell else {
            complete = false;
            continue;
        };
        let seeds: Vec<u64> = (0..n_seeds).map(|i| gphh_seed(common.seed, cell.config.seed, i)).collect();
        let runs = train_cell(&cell, &cfg, &seeds)?;
        let dir = common.out.join(cell.id());
        fs::create_dir_all(&dir)?;
        let comments: Vec<String> = runs
            .iter()
            .map(|r| format!("seed {} validation {} test {}", r.seed, r.validation_profit, r.test_profit))
            .collect();
        let trees: Vec<PolicyTree> = runs.iter().map(|r| r.policy.clone()).collect();
        write_policy_file(&dir.join("policies.txt"), &comments, &trees)?;
        for (i, r) in runs.iter().enumerate() {
            write_history_csv(csv_file(dir.join(format!("history_{i}.csv")))?, &r.history)?;
        }
        let best = runs.iter().map(|r| r.test_profit).fold(f64::NEG_INFINITY, f64::max);
        println!("{}: best test profit {best:.2} over {} runs", cell.id(), runs.len());
    }
    Ok(complete)
}

fn cmd_baselines(common: &Common, bench: &Path, slack_m: f64) -> Result<bool> {
    let manifest = read_manifest(bench)?;
    let cfg = EvolutionConfig { slack_m, ..EvolutionConfig::default() };
    write_run_config(&common.out, &run_config("baselines", common, manifest.profile, Some(bench), cfg, 0))?;
    let mut rows = Vec::new();
    let mut complete = true;
    for cell in selected_cells(bench, &manifest, &common.filter) {
        let Some(cell) = cell else {
            complete = false;
            continue;
        };
        let lah = best_lah(&cell.test, slack_m);
        let mdh = evaluate_specs(&BaselineSpec::mdh_all(), &cell.test, slack_m);
        for e in lah.sweep.iter().chain(&mdh) {
            rows.push(BaselineRow {
                scenario: cell.id(),
                variant: e.spec.kind(),
                k: e.spec.lookahead(),
                expected_profit: e.expected_profit,
            });
        }
        println!("{}: best LAH {} = {:.2}", cell.id(), lah.best.spec, lah.best.expected_profit);
    }
    write_baselines_csv(csv_file(common.out.join("baselines.csv"))?, &rows)?;
    Ok(complete)
}

fn cmd_compare(common: &Common, bench: &Path, evo: &EvoArgs) -> Result<bool> {
    let manifest = read_manifest(bench)?;
    let evolution = evolution_config(evo, &manifest);
    let gphh_seeds = evo.gphh_seeds.unwrap_or(manifest.profile.gphh_seeds());
    write_run_config(&common.out, &run_config("compare", common, manifest.profile, Some(bench), evolution.clone(), gphh_seeds))?;
    let cfg = CompareConfig {
        evolution,
        gphh_seeds,
        run_seed: common.seed,
    };
    let (mut reports, mut baseline_rows, mut schedules) = (Vec::new(), Vec::new(), Vec::new());
    let mut complete = true;
    for cell in selected_cells(bench, &manifest, &common.filter) {
        let Some(cell) = cell else {
            complete = false;
            continue;
        };
        let cmp = compare_cell(&cell, &cfg)?;
        let dir = common.out.join(cell.id());
        fs::create_dir_all(&dir)?;
        let comments: Vec<String> = cmp
            .runs
            .iter()
            .map(|r| format!("seed {} validation {} test {}", r.seed, r.validation_profit, r.test_profit))
            .collect();
        let trees: Vec<PolicyTree> = cmp.runs.iter().map(|r| r.policy.clone()).collect();
        write_policy_file(&dir.join("policies.txt"), &comments, &trees)?;
        write_policy_file(&dir.join("best_policy.txt"), &comments[cmp.best_run..=cmp.best_run], &trees[cmp.best_run..=cmp.best_run])?;
        for (i, r) in cmp.runs.iter().enumerate() {
            write_history_csv(csv_file(dir.join(format!("history_{i}.csv")))?, &r.history)?;
        }
        baseline_rows.extend(cmp.lah_sweep.iter().chain(&cmp.mdh).map(|e| BaselineRow {
            scenario: cell.id(),
            variant: e.spec.kind(),
            k: e.spec.lookahead(),
            expected_profit: e.expected_profit,
        }));
        let r = &cmp.report;
        println!(
            "{}: LAH {:.2}  MDH {:.2}  GPHH best/mean/worst {:.2}/{:.2}/{:.2}",
            r.cell, r.lah_profit, r.mdh_best_profit, r.gphh_best_profit, r.gphh_mean_profit, r.gphh_worst_profit
        );
        schedules.extend(cmp.schedules);
        reports.push(cmp.report);
    }
    write_csv(csv_file(common.out.join("report.csv"))?, &reports)?;
    let agg = aggregate(&reports);
    write_csv(csv_file(common.out.join("aggregate.csv"))?, &agg)?;
    write_baselines_csv(csv_file(common.out.join("baselines.csv"))?, &baseline_rows)?;
    fs::write(common.out.join("schedules.json"), serde_json::to_string(&schedules)?)?;
    if let Some(all) = agg.last() {
        let pct = |g: Option<f64>| g.map_or("n/a".to_string(), |g| format!("{:+.2}%", 100.0 * g));
        println!(
            "mean gap vs LAH (best/mean/worst): {} {} {}",
            pct(all.mean_gap_lah_best),
            pct(all.mean_gap_lah_mean),
            pct(all.mean_gap_lah_worst)
        );
        println!(
            "mean gap vs MDH (best/mean/worst): {} {} {}",
            pct(all.mean_gap_mdh_best),
            pct(all.mean_gap_mdh_mean),
            pct(all.mean_gap_mdh_worst)
        );
    }
    Ok(complete)
}

fn cmd_trajectory(common: &Common, bench: &Path, case: usize, policy: Option<&Path>, slack_m: f64) -> Result<bool> {
    let manifest = read_manifest(bench)?;
    let cfg = EvolutionConfig { slack_m, ..EvolutionConfig::default() };
    write_run_config(&common.out, &run_config("trajectory", common, manifest.profile, Some(bench), cfg, 0))?;
    let trees = match policy {
        Some(p) => read_policy_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    let mut points = Vec::new();
    let mut complete = true;
    for cell in selected_cells(bench, &manifest, &common.filter) {
        let Some(cell) = cell else {
            complete = false;
            continue;
        };
        let Some(c) = cell.test.get(case) else {
            bail!("cell {} has only {} test cases", cell.id(), cell.test.len());
        };
        let lah = best_lah(&cell.test, slack_m).best.spec;
        let mut policies: Vec<(String, &dyn Policy)> = vec![(lah.to_string(), &lah)];
        let mdh = BaselineSpec::mdh_all();
        policies.extend(mdh.iter().map(|s| (s.to_string(), s as &dyn Policy)));
        policies.extend(trees.iter().enumerate().map(|(i, t)| (format!("GPHH{i}"), t as &dyn Policy)));
        for mut p in export_trajectory(&c.instance, &c.env, &policies, slack_m) {
            p.policy = format!("{}/{}", cell.id(), p.policy);
            points.push(p);
        }
    }
    write_csv(csv_file(common.out.join("trajectory.csv"))?, &points)?;
    Ok(complete)
}

fn cmd_validate(common: &Common, bench: &Path, schedules: &Path) -> Result<bool> {
    let manifest = read_manifest(bench)?;
    write_run_config(&common.out, &run_config("validate", common, manifest.profile, Some(bench), EvolutionConfig::default(), 0))?;
    let records: Vec<ScheduleRecord> = serde_json::from_str(&fs::read_to_string(schedules)?)?;
    let mut by_cell: BTreeMap<&str, Vec<&ScheduleRecord>> = BTreeMap::new();
    for r in &records {
        by_cell.entry(r.cell.as_str()).or_default().push(r);
    }
    let (mut checked, mut infeasible) = (0usize, 0usize);
    let mut tally: BTreeMap<ConstraintTag, usize> = BTreeMap::new();
    for (id, recs) in by_cell {
        let Some(cell) = manifest.cell(id) else {
            bail!("schedules refer to cell {id}, which is not in the manifest");
        };
        if !common.filter.matches(&cell.config) {
            continue;
        }
        let data = load_cell(bench, cell)?;
        for r in recs {
            let Some(c) = data.split(r.split).get(r.case) else {
                bail!("cell {id} has no {} case {}", r.split.name(), r.case);
            };
            let report = validate_schedule(&c.instance, &c.env, &r.schedule);
            checked += 1;
            if !report.is_feasible() {
                infeasible += 1;
                for v in &report.violations {
                    *tally.entry(v.constraint).or_default() += 1;
                    warn!("{id} {} case {} {}: {v:?}", r.split.name(), r.case, r.method);
                }
            }
        }
    }
    println!("checked {checked} schedules, {infeasible} infeasible");
    for (tag, n) in tally {
        println!("  {tag}: {n}");
    }
    Ok(infeasible == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen { common, profile } => cmd_gen(common, *profile),
        Command::Train { common, bench, evo } => cmd_train(common, bench, evo),
        Command::Baselines { common, bench, slack_m } => cmd_baselines(common, bench, *slack_m),
        Command::Compare { common, bench, evo } => cmd_compare(common, bench, evo),
        Command::Trajectory { common, bench, case, policy, slack_m } => {
            cmd_trajectory(common, bench, *case, policy.as_deref(), *slack_m)
        }
        Command::Validate { common, bench, schedules } => cmd_validate(common, bench, schedules),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            warn!("some requested cells did not complete");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
