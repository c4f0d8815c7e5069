use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hybridsched::bounds::search_bounds;
use hybridsched::encoder::{build_fp, build_rp, model_stats, write_lp, EncoderConfig};
use hybridsched::experiment::{format_summary, run_experiment, summarize, write_csv, ExperimentSpec, Scheduler};
use hybridsched::generator::{Family, GenConfig};
use hybridsched::io::{instance_to_json, read_instance, read_text, schedule_from_json, write_text};
use hybridsched::solver::{solve_feasibility, Feasibility, SolveStatus, SolverConfig};
use hybridsched::validate::{makespan, validate_schedule};
use hybridsched::{NetworkConfig, Result, Schedule, TimeUnits};

/// Exit codes: 0 success, 1 bad input, 2 infeasible or invalid, 3 unknown.
#[derive(Parser)]
#[command(name = "hybridsched", version, about = "Job scheduling over wired and wireless rack links")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Schedule an instance and print the schedule as JSON.
    Solve(SolveArgs),
    /// Write the MILP model of an instance in LP format.
    ExportLp(ExportArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Run a sweep described by a JSON spec and write a CSV of results.
    Experiment(ExperimentArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Limits {
    #[arg(long)]
    node_limit: Option<u64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl Limits {
    fn config(&self, seed: Option<u64>) -> std::result::Result<SolverConfig, String> {
        let time_limit = match self.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err(format!("bad time limit {t}")),
            t => t.map(Duration::from_secs_f64),
        };
        Ok(SolverConfig { node_limit: self.node_limit, time_limit, deterministic_seed: seed })
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "exact")]
    scheduler: Scheduler,
    /// Seeds the random baseline and the exact search's tie-breaking.
    #[arg(long)]
    seed: Option<u64>,
    /// Only decide whether a makespan of at most this many ticks exists.
    #[arg(long)]
    level: Option<u64>,
    #[command(flatten)]
    limits: Limits,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    /// Export the feasibility model at this makespan cap instead of the
    /// minimisation model.
    #[arg(long)]
    level: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = ["simple-mapreduce", "onestage-mapreduce", "random-dag"])]
    family: String,
    /// Task count of a random DAG.
    #[arg(long, default_value_t = 8)]
    tasks: usize,
    #[arg(long, default_value_t = 4)]
    n_map: usize,
    #[arg(long, default_value_t = 2)]
    n_reduce: usize,
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    p_min: u64,
    #[arg(long, default_value_t = 100)]
    p_max: u64,
    /// Defaults to one rack per task.
    #[arg(long)]
    racks: Option<u32>,
    #[arg(long, default_value_t = 1)]
    subchannels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    spec: PathBuf,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    schedule: PathBuf,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    scheduler: Scheduler,
    status: SolveStatus,
    makespan: Option<TimeUnits>,
    lower_bound: TimeUnits,
    nodes: u64,
    schedule: &'a Schedule,
}

enum Failure {
    Input(String),
    Code(u8),
}

impl From<hybridsched::Error> for Failure {
    fn from(e: hybridsched::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let res = match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::ExportLp(a) => export_lp(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Experiment(a) => experiment(a),
        Cmd::Validate(a) => validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Code(c)) => ExitCode::from(c),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(a: SolveArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let cfg = a.limits.config(a.seed).map_err(Failure::Input)?;
    let lower = search_bounds(&inst).lower;

    let (status, schedule, nodes) = if let Some(level) = a.level {
        if a.scheduler != Scheduler::Exact {
            return Err(Failure::Input("--level needs the exact scheduler".into()));
        }
        match solve_feasibility(&inst, TimeUnits(level), &cfg)? {
            Feasibility::Feasible(s) => (SolveStatus::Feasible, Some(s), 0),
            Feasibility::Infeasible => (SolveStatus::Infeasible, None, 0),
            Feasibility::Unknown => (SolveStatus::Unknown, None, 0),
        }
    } else {
        let r = a.scheduler.run(&inst, &cfg, a.seed.unwrap_or(0))?;
        (r.status, r.schedule, r.nodes_explored)
    };

    let Some(schedule) = schedule else {
        eprintln!("{status}");
        return Err(Failure::Code(if status == SolveStatus::Infeasible { 2 } else { 3 }));
    };
    if let Some(v) = validate_schedule(&inst, &schedule).first() {
        return Err(Failure::Input(format!("internal error: emitted schedule is invalid: {v}")));
    }
    let out = SolveOutput {
        scheduler: a.scheduler,
        status,
        makespan: Some(makespan(&schedule, inst.job())?),
        lower_bound: lower,
        nodes,
        schedule: &schedule.canonical(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("serializable");
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

fn export_lp(a: ExportArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let bounds = search_bounds(&inst);
    let cfg = EncoderConfig::default();
    let model = match a.level {
        Some(l) => build_fp(&inst, bounds, TimeUnits(l), &cfg)?,
        None => build_rp(&inst, bounds, &cfg)?,
    };
    let stats = model_stats(&model);
    let line = format!(
        "binary={} continuous={} constraints={}",
        stats.n_binary, stats.n_continuous, stats.n_constraints
    );
    emit(a.out.as_deref(), &write_lp(&model))?;
    if a.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn gen(a: GenArgs) -> CmdResult {
    let family = match a.family.as_str() {
        "simple-mapreduce" => Family::SimpleMapreduce { n_map: a.n_map },
        "onestage-mapreduce" => Family::OnestageMapreduce { n_map: a.n_map, n_reduce: a.n_reduce },
        _ => Family::RandomDag { n_tasks: a.tasks, edge_prob: a.edge_prob },
    };
    let n = match family {
        Family::SimpleMapreduce { n_map } => n_map + 1,
        Family::OnestageMapreduce { n_map, n_reduce } => n_map + n_reduce,
        Family::RandomDag { n_tasks, .. } => n_tasks,
    };
    let racks = a.racks.unwrap_or(n.max(1) as u32);
    let cfg = GenConfig {
        seed: a.seed,
        network_factor: a.rho,
        processing_range: (a.p_min, a.p_max),
        network: Some(NetworkConfig::new(racks, a.subchannels)),
    };
    let inst = family.generate(&cfg)?;
    emit(a.out.as_deref(), &instance_to_json(&inst))?;
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CmdResult {
    let spec = ExperimentSpec::from_json(&read_text(&a.spec)?)?;
    let rows = run_experiment(&spec)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    let summary = format_summary(&summarize(&spec, &rows)?);
    match &a.out {
        Some(p) => {
            std::fs::write(p, &csv).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            print!("{summary}");
        }
        None => {
            print!("{}", String::from_utf8(csv).expect("csv is utf-8"));
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    // accepts the output of `solve` as well as a bare schedule
    let text = read_text(&a.schedule)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(hybridsched::Error::from)?;
    let schedule = match value.get("schedule") {
        Some(inner) => serde_json::from_value(inner.clone()).map_err(hybridsched::Error::from)?,
        None => schedule_from_json(&text)?,
    };
    let violations = validate_schedule(&inst, &schedule);
    if violations.is_empty() {
        println!("valid, makespan {}", makespan(&schedule, inst.job())?);
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::Code(2))
}
