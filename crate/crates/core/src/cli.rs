//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for invalid input (flags, files, schema,
//! instance or plan checks), 2 when a solver or fit fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::acceptance::{SolverConfig, DEFAULT_EPSILON_FLOOR};
use crate::assignment::{solve_two_phase, solve_with_weights};
use crate::error::{Error, Result};
use crate::experiments::{
    paired_t_records, read_records, sweep_to_csv, trend_report, Axis, ExperimentRecord, Metric, SweepConfig,
};
use crate::gen::{generate, simulate_decisions, CapRule, GenConfig, DEFAULT_FIT_POINTS};
use crate::json::{load_instance, plan_to_json, save_instance};
use crate::model::{validate, ModelKind};
use crate::nonsep::{load_constraints, solve_nonsep, MilpStatus, NonSepOptions};
use crate::schemes::{scheme_weights, tune_scheme, SchemeKind, SchemeSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "crowdcomp", version, about = "Compensation and assignment for crowdsourced delivery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance under one compensation scheme.
    Solve(SolveArgs),
    /// Solve with linear side constraints via the piecewise-linear model.
    Nonsep(NonsepArgs),
    /// Tune the rate of a benchmark scheme.
    Tune(TuneArgs),
    /// Run a parameter sweep into a results CSV.
    Sweep(SweepArgs),
    /// Paired t-tests and trends over a results CSV.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Smallest positive compensation considered.
    #[arg(long, default_value_t = DEFAULT_EPSILON_FLOOR)]
    pub epsilon_floor: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if !(self.epsilon_floor > 0.0) {
            return Err(Error::Config(format!(
                "--epsilon-floor must be > 0, got {}",
                self.epsilon_floor
            )));
        }
        Ok(SolverConfig {
            epsilon_floor: self.epsilon_floor,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of tasks.
    #[arg(long, default_value_t = 100)]
    pub tasks: usize,
    /// Number of occasional drivers.
    #[arg(long, default_value_t = 100)]
    pub drivers: usize,
    /// Relative penalty on a rejected offer, in [0, 0.25].
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Detour willingness, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    #[arg(long, env = "CROWDCOMP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Acceptance model: linear or logistic.
    #[arg(long, default_value = "linear")]
    pub model: ModelKind,
    /// Compensation upper bound: company (c_i) or penalized (c'_i).
    #[arg(long, default_value = "company")]
    pub cap_rule: CapRule,
    /// Simulated decisions behind a logistic calibration.
    #[arg(long, default_value_t = DEFAULT_FIT_POINTS)]
    pub fit_points: usize,
    /// Also export the simulated decision dataset to this CSV.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Instance JSON output.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON.
    pub instance: PathBuf,
    /// individual, detour, distance or flat.
    #[arg(long, default_value = "individual")]
    pub scheme: SchemeKind,
    /// Fixed benchmark rate; tuned when omitted.
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Plan JSON output (standard output when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NonsepArgs {
    /// Instance JSON.
    pub instance: PathBuf,
    /// JSON array of constraints `{"a": [[..]], "b": [[..]], "B": limit}`.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Breakpoints per pair (>= 2).
    #[arg(long, default_value_t = 11)]
    pub breakpoints: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Branch-and-bound node limit.
    #[arg(long, default_value_t = 100_000)]
    pub node_limit: usize,
    /// Add segment binaries on convex pairs too.
    #[arg(long)]
    pub force_segment_binaries: bool,
    /// Plan JSON output (standard output when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Instance JSON.
    pub instance: PathBuf,
    /// detour, distance or flat.
    #[arg(long)]
    pub scheme: SchemeKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report JSON output (standard output when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "linear,logistic")]
    pub models: Vec<ModelKind>,
    #[arg(long, default_value_t = 20)]
    pub tasks: usize,
    /// Driver counts (O).
    #[arg(long, value_delimiter = ',', default_value = "10,30")]
    pub drivers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1")]
    pub rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.7")]
    pub mus: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "individual,detour,distance,flat")]
    pub schemes: Vec<SchemeKind>,
    #[arg(long, default_value = "company")]
    pub cap_rule: CapRule,
    #[arg(long, default_value_t = DEFAULT_FIT_POINTS)]
    pub fit_points: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "CROWDCOMP_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Record per-row wall time (makes the output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Results CSV; existing rows are kept and skipped.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Results CSV.
    pub results: PathBuf,
    /// Column compared or aggregated.
    #[arg(long, default_value = "cost_saving_pct")]
    pub metric: Metric,
    /// Reference scheme of the paired tests.
    #[arg(long, default_value = "individual")]
    pub baseline: SchemeKind,
    /// Aggregate the baseline scheme per level of O, rho or mu instead.
    #[arg(long)]
    pub trend: Option<Axis>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Fit(_) | Error::Milp(_) | Error::LambertDomain(_) | Error::SchemeUndefined(_) | Error::Stats(_) => {
            EXIT_SOLVER
        }
        _ => EXIT_INVALID,
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Nonsep(a) => cmd_nonsep(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let cfg = GenConfig {
        n_tasks: a.tasks,
        n_drivers: a.drivers,
        rho: a.rho,
        mu: a.mu,
        seed: a.seed,
        model: a.model,
        cap_rule: a.cap_rule,
        fit_points: a.fit_points,
    };
    cfg.check()?;
    let inst = generate(&cfg)?;
    save_instance(&inst, &a.output)?;
    if let Some(path) = a.dataset {
        simulate_decisions(a.seed, a.mu, a.fit_points).save_csv(&path)?;
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let inst = load_instance(&a.instance)?;
    inst.check()?;
    let plan = match (a.scheme, a.p) {
        (SchemeKind::Individual, Some(_)) => {
            return Err(Error::Config("--p applies to benchmark schemes only".into()))
        }
        (SchemeKind::Individual, None) => solve_two_phase(&inst, &cfg)?,
        (kind, Some(p)) => {
            if !(p >= 0.0) {
                return Err(Error::Config(format!("--p must be >= 0, got {p}")));
            }
            solve_with_weights(&inst, &scheme_weights(&inst, SchemeSpec { kind, p }, &cfg)?)?
        }
        (kind, None) => tune_scheme(kind, &inst, &cfg)?.plan,
    };
    debug_assert!(validate(&plan, &inst).is_empty());
    emit(a.output.as_deref(), &plan_to_json(&plan)?)
}

fn cmd_nonsep(a: NonsepArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let inst = load_instance(&a.instance)?;
    inst.check()?;
    let constraints = match &a.constraints {
        Some(p) => load_constraints(p)?,
        None => Vec::new(),
    };
    let opts = NonSepOptions {
        breakpoints: a.breakpoints,
        epsilon_floor: cfg.epsilon_floor,
        node_limit: a.node_limit,
        force_segment_binaries: a.force_segment_binaries,
    };
    let res = solve_nonsep(&inst, &constraints, &opts)?;
    eprintln!(
        "status={} objective={} bound={} nodes={}",
        res.status.as_str(),
        res.objective.map_or("none".into(), |v| v.to_string()),
        res.bound,
        res.nodes_explored
    );
    match (res.status, res.plan) {
        (MilpStatus::Infeasible, _) => Err(Error::Milp("model is infeasible".into())),
        (_, None) => Err(Error::Milp(format!(
            "node limit {} reached without a feasible plan",
            a.node_limit
        ))),
        (_, Some(plan)) => emit(a.output.as_deref(), &plan_to_json(&plan)?),
    }
}

#[derive(Serialize)]
struct TuneReport {
    scheme: SchemeKind,
    p: f64,
    objective: f64,
    p_max: f64,
    evaluations: usize,
    grid: Vec<(f64, f64)>,
}

fn cmd_tune(a: TuneArgs) -> Result<()> {
    if a.scheme == SchemeKind::Individual {
        return Err(Error::Config("the individual scheme has no rate to tune".into()));
    }
    let cfg = a.solver.config()?;
    let inst = load_instance(&a.instance)?;
    inst.check()?;
    let t = tune_scheme(a.scheme, &inst, &cfg)?;
    let report = TuneReport {
        scheme: a.scheme,
        p: t.p,
        objective: t.objective,
        p_max: t.p_max,
        evaluations: t.evaluations,
        grid: t.grid,
    };
    emit(a.output.as_deref(), &to_json(&report))
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let solver = a.solver.config()?;
    let cfg = SweepConfig {
        models: a.models,
        n_tasks: a.tasks,
        drivers: a.drivers,
        rhos: a.rhos,
        mus: a.mus,
        seeds: a.seeds,
        schemes: a.schemes,
        cap_rule: a.cap_rule,
        fit_points: a.fit_points,
        solver,
        timing: a.timing,
    };
    for g in cfg.instances() {
        g.check()?;
    }
    let rows = sweep_to_csv(&cfg, &a.output, a.jobs)?;
    eprintln!("{} rows in {}", rows.len(), a.output.display());
    Ok(())
}

#[derive(Serialize)]
struct PairedReport {
    scheme: SchemeKind,
    against: SchemeKind,
    n: usize,
    mean_diff: f64,
    t_stat: Option<f64>,
    p_value: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct TrendReport {
    level: f64,
    mean: f64,
    count: usize,
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let records = read_records(&a.results)?;
    let of = |s: SchemeKind| -> Vec<ExperimentRecord> { records.iter().filter(|r| r.scheme == s).cloned().collect() };
    let base = of(a.baseline);
    if base.is_empty() {
        return Err(Error::Config(format!("no `{}` rows in {}", a.baseline, a.results.display())));
    }
    if let Some(axis) = a.trend {
        let levels: Vec<TrendReport> = trend_report(&base, axis, a.metric)
            .into_iter()
            .map(|l| TrendReport {
                level: l.level,
                mean: l.mean,
                count: l.count,
            })
            .collect();
        return emit(None, &to_json(&levels));
    }
    let mut reports = Vec::new();
    for other in SchemeKind::ALL.into_iter().filter(|&s| s != a.baseline) {
        let rows = of(other);
        if rows.is_empty() {
            continue;
        }
        let t = paired_t_records(&base, &rows, a.metric)?;
        reports.push(PairedReport {
            scheme: a.baseline,
            against: other,
            n: t.n,
            mean_diff: t.mean_diff,
            t_stat: t.t_stat.is_finite().then_some(t.t_stat),
            p_value: t.p_value,
            degenerate: t.degenerate,
        });
    }
    emit(None, &to_json(&reports))
}
