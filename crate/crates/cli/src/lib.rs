//! Command-line front end: per-task analysis, oracle comparison and
//! acceptance-ratio sweeps over generated task sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use k2u::analysis::{analyze_taskset, TaskReport};
use k2u::presets::{Preset, PresetConfig};
use k2u::task::{assign_priorities, PriorityPolicy, Task, TaskSet};
use k2u::taskgen::{generate, DeadlineModel, GenSpec};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or a configuration the preset cannot use.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input, or an analysis failure.
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

impl From<k2u::Error> for CliError {
    fn from(err: k2u::Error) -> Self {
        use k2u::Error as E;
        match err {
            E::MissingConfig { .. }
            | E::InvalidConfig(_)
            | E::InflationWithJitter(_)
            | E::ImplicitDeadlineRequired(_)
            | E::InfeasibleSpec(_)
            | E::InvalidService(_) => CliError::Usage(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "k2u", version, about = "Fixed-priority schedulability analysis with k-point tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze every task of a JSON task set.
    Analyze(AnalyzeArgs),
    /// Acceptance ratios of every test over generated task sets.
    Sweep(SweepArgs),
    /// Count agreements between each polynomial test and the exact oracle.
    Compare(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// Keep the order of the input file.
    AsGiven,
    Rm,
    Dm,
}

impl From<Policy> for PriorityPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::AsGiven => PriorityPolicy::AsGiven,
            Policy::Rm => PriorityPolicy::RateMonotonic,
            Policy::Dm => PriorityPolicy::DeadlineMonotonic,
        }
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

/// Preset and scenario flags shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long, default_value = "uni_preemptive", value_parser = parse_preset)]
    pub preset: Preset,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Inflation `b` (the burst constant for `bursty`).
    #[arg(long)]
    pub b: Option<f64>,
    /// Processor count.
    #[arg(long = "M")]
    pub processors: Option<u32>,
    /// Uniform jitter ratio: task `i` has jitter `delta * T_i`.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tcycle: Option<f64>,
    #[arg(long)]
    pub cslot: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tdelay: Option<f64>,
    /// Overrides the suspension time of each analyzed task.
    #[arg(long)]
    pub suspension: Option<f64>,
    /// Extra execution added to each analyzed task.
    #[arg(long)]
    pub extra_wcet: Option<f64>,
}

impl ScenarioArgs {
    pub fn config(&self) -> PresetConfig {
        PresetConfig {
            processors: self.processors,
            sigma: self.sigma,
            inflation: self.b,
            delta: self.delta,
            t_cycle: self.tcycle,
            c_slot: self.cslot,
            gamma: self.gamma,
            t_delay: self.tdelay,
            suspension: self.suspension,
            extra_wcet: self.extra_wcet,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Task set: `{"tasks": [{"id", "C", "T", "D"?, "S"?, "J"?}, ...]}`.
    pub taskset: PathBuf,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "as-given")]
    pub policy: Policy,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Tasks per set.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub u_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub u_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub u_step: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 10.0)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub tmax: f64,
    /// Draw constrained deadlines `D = C + f (T - C)` with `f` in `[dmin, 1]`.
    #[arg(long)]
    pub dmin: Option<f64>,
    #[arg(long, value_enum, default_value = "rm")]
    pub policy: Policy,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn load_taskset(path: &Path) -> CliResult<Vec<Task>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let set = TaskSet::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if set.tasks.is_empty() {
        return Err(CliError::Input(format!("{}: empty task set", path.display())));
    }
    Ok(set.tasks)
}

pub fn analyze_tasks(tasks: &[Task], policy: Policy, scenario: &ScenarioArgs) -> CliResult<Vec<TaskReport>> {
    let ordered = assign_priorities(tasks, policy.into());
    Ok(analyze_taskset(&ordered, scenario.preset, &scenario.config())?)
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    } else {
        x.to_string()
    }
}

pub fn render_analysis(reports: &[TaskReport], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize"),
        Format::Csv => {
            let mut out = String::from("task,test,verdict,lhs,rhs\n");
            for r in reports {
                for (name, v) in r.report.named_verdicts() {
                    let verdict = if v.is_schedulable() { "schedulable" } else { "unknown" };
                    let _ = writeln!(out, "{},{name},{verdict},{},{}", r.task_id, v.lhs, v.rhs);
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                let _ = writeln!(out, "task {} (service reduction: {})", r.task_id, r.report.reduction.name());
                for d in &r.report.derivations {
                    let p = &d.params;
                    let _ = writeln!(
                        out,
                        "  split {}: t_k = {}, C_k = {}",
                        d.rule.name(),
                        fmt_num(p.t_k),
                        fmt_num(p.c_k_eff)
                    );
                    if !p.hp2_ids().is_empty() {
                        let _ = writeln!(out, "    constant interference from: {}", p.hp2_ids().join(", "));
                    }
                    for e in &p.entries {
                        let _ = writeln!(
                            out,
                            "    {:<12} t = {:<10} alpha = {:<10} beta = {:<10} U = {}",
                            e.task_id,
                            fmt_num(e.t),
                            fmt_num(e.alpha),
                            fmt_num(e.beta),
                            fmt_num(e.utilization)
                        );
                    }
                }
                for (name, v) in r.report.named_verdicts() {
                    let verdict = if v.is_schedulable() { "schedulable" } else { "unknown" };
                    let _ = writeln!(
                        out,
                        "  {name:<22} {verdict:<12} {} <= {}",
                        fmt_num(v.lhs),
                        fmt_num(v.rhs)
                    );
                }
            }
            out
        }
    }
}

/// Agreement of one polynomial test with the oracle, counted over tasks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub test: String,
    pub accept_accept: usize,
    pub unknown_accept: usize,
    /// Polynomial test accepted, oracle did not: a soundness violation.
    pub accept_unknown: usize,
    pub unknown_unknown: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<Agreement>,
}

impl CompareReport {
    pub fn forbidden(&self) -> usize {
        self.rows.iter().map(|r| r.accept_unknown).sum()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Csv => {
                let mut out = String::from("test,accept_accept,unknown_accept,accept_unknown,unknown_unknown\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        r.test, r.accept_accept, r.unknown_accept, r.accept_unknown, r.unknown_unknown
                    );
                }
                out
            }
            Format::Text => {
                let mut out = format!(
                    "{:<22} {:>14} {:>14} {:>14} {:>16}\n",
                    "test", "accept/accept", "unknown/accept", "accept/unknown", "unknown/unknown"
                );
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{:<22} {:>14} {:>14} {:>14} {:>16}",
                        r.test, r.accept_accept, r.unknown_accept, r.accept_unknown, r.unknown_unknown
                    );
                }
                let _ = writeln!(out, "soundness violations: {}", self.forbidden());
                out
            }
        }
    }
}

/// Tallies every polynomial verdict against the oracle verdict of the same task.
pub fn compare_reports(reports: &[TaskReport]) -> CompareReport {
    let mut rows: BTreeMap<String, Agreement> = BTreeMap::new();
    for r in reports {
        let oracle = r.report.tda.is_schedulable();
        for (name, v) in r.report.named_verdicts() {
            if name == "tda" {
                continue;
            }
            let row = rows.entry(name.clone()).or_insert_with(|| Agreement {
                test: name,
                ..Default::default()
            });
            match (v.is_schedulable(), oracle) {
                (true, true) => row.accept_accept += 1,
                (false, true) => row.unknown_accept += 1,
                (true, false) => row.accept_unknown += 1,
                (false, false) => row.unknown_unknown += 1,
            }
        }
    }
    CompareReport {
        rows: rows.into_values().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub total_u: f64,
    pub test: String,
    pub accepted: usize,
    pub trials: usize,
}

/// Rows ordered by `(total_u, test)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str = "total_U,test,accepted,trials";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.total_u, r.test, r.accepted, r.trials);
        }
        out
    }

    pub fn accepted(&self, total_u: f64, test: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.total_u == total_u && r.test == test)
            .map(|r| r.accepted)
    }
}

/// Evenly spaced utilizations from `min` to `max` inclusive, rounded to
/// 12 decimals so that the labels do not carry accumulation error.
pub fn utilization_grid(min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(min > 0.0 && max >= min && step > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "invalid utilization range {min}..{max} step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Seed of one trial, independent of scheduling order.
fn trial_seed(base: u64, u_index: usize, trial: usize) -> u64 {
    base ^ ((u_index as u64) << 40) ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A task set counts as accepted by a test if every task is.
fn accepted_tests(reports: &[TaskReport]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut seen = BTreeSet::new();
    let mut rejected = BTreeSet::new();
    let mut per_task: Vec<BTreeSet<String>> = Vec::new();
    for r in reports {
        let mut here = BTreeSet::new();
        for (name, v) in r.report.named_verdicts() {
            seen.insert(name.clone());
            if v.is_schedulable() {
                here.insert(name);
            } else {
                rejected.insert(name);
            }
        }
        per_task.push(here);
    }
    let accepted = seen
        .iter()
        .filter(|name| !rejected.contains(*name) && per_task.iter().all(|t| t.contains(*name)))
        .cloned()
        .collect();
    (seen, accepted)
}

pub fn run_sweep(args: &SweepArgs) -> CliResult<SweepResult> {
    let grid = utilization_grid(args.u_min, args.u_max, args.u_step)?;
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let deadline_model = match args.dmin {
        None => DeadlineModel::Implicit,
        Some(f) => DeadlineModel::Constrained {
            min_factor: f,
            max_factor: 1.0,
        },
    };
    let config = args.scenario.config();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|u| (0..args.trials).map(move |t| (u, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(u_index, trial)| {
            let spec = GenSpec {
                n: args.n,
                total_utilization: grid[u_index],
                period_range: (args.tmin, args.tmax),
                deadline_model,
                grid: 1e-3,
                seed: trial_seed(args.seed, u_index, trial),
            };
            let tasks = assign_priorities(&generate(&spec)?, args.policy.into());
            let reports = analyze_taskset(&tasks, args.scenario.preset, &config)?;
            Ok((u_index, accepted_tests(&reports)))
        })
        .collect::<Result<Vec<_>, k2u::Error>>()?;

    let mut names = BTreeSet::new();
    let mut counts: BTreeMap<(usize, String), usize> = BTreeMap::new();
    for (u_index, (seen, accepted)) in outcomes {
        names.extend(seen);
        for name in accepted {
            *counts.entry((u_index, name)).or_default() += 1;
        }
    }
    let mut rows = Vec::with_capacity(grid.len() * names.len());
    for (u_index, &total_u) in grid.iter().enumerate() {
        for name in &names {
            rows.push(SweepRow {
                total_u,
                test: name.clone(),
                accepted: counts.get(&(u_index, name.clone())).copied().unwrap_or(0),
                trials: args.trials,
            });
        }
    }
    Ok(SweepResult { rows })
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Analyze(args) => {
            let tasks = load_taskset(&args.taskset)?;
            let reports = analyze_tasks(&tasks, args.policy, &args.scenario)?;
            emit(&render_analysis(&reports, args.format), args.out.as_deref())?;
            Ok(0)
        }
        Command::Compare(args) => {
            let tasks = load_taskset(&args.taskset)?;
            let reports = analyze_tasks(&tasks, args.policy, &args.scenario)?;
            let report = compare_reports(&reports);
            emit(&report.render(args.format), args.out.as_deref())?;
            Ok(if report.forbidden() > 0 { EXIT_UNSOUND } else { 0 })
        }
        Command::Sweep(args) => {
            let result = run_sweep(&args)?;
            let text = match args.format {
                Format::Json => serde_json::to_string_pretty(&result).expect("sweep serializes"),
                Format::Csv | Format::Text => result.to_csv(),
            };
            emit(&text, args.out.as_deref())?;
            Ok(0)
        }
    }
}
