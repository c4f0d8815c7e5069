//! Batch sweeps over generated instances: one CSV row per (cell, instance,
//! scheduler), plus per-cell means and wireless gains.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{list_schedule, random_schedule, single_rack_schedule};
use crate::error::{Error, Result};
use crate::generator::{Family, GenConfig};
use crate::model::{NetworkConfig, ProblemInstance, Schedule};
use crate::solver::{solve_exact_from, solve_wired_only, SolveStatus, SolverConfig, SolverResult};
use crate::time::TimeUnits;
use crate::validate::{makespan, validate_schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    Exact,
    WiredOnly,
    List,
    Random,
    SingleRack,
}

impl Scheduler {
    pub const ALL: [Scheduler; 5] = [
        Scheduler::Exact,
        Scheduler::WiredOnly,
        Scheduler::List,
        Scheduler::Random,
        Scheduler::SingleRack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheduler::Exact => "exact",
            Scheduler::WiredOnly => "wired-only",
            Scheduler::List => "list",
            Scheduler::Random => "random",
            Scheduler::SingleRack => "single-rack",
        }
    }

    /// Runs the scheduler. Heuristic schedules are reported as `Feasible`.
    /// `seed` drives the random baseline only.
    pub fn run(self, instance: &ProblemInstance, cfg: &SolverConfig, seed: u64) -> Result<SolverResult> {
        match self {
            Scheduler::Exact => solve_exact_from(instance, cfg, None),
            Scheduler::WiredOnly => solve_wired_only(instance, cfg),
            Scheduler::List => heuristic(instance, list_schedule(instance)),
            Scheduler::Random => heuristic(instance, random_schedule(instance, seed)),
            Scheduler::SingleRack => heuristic(instance, single_rack_schedule(instance)?),
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scheduler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheduler::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheduler `{s}`")))
    }
}

fn heuristic(instance: &ProblemInstance, schedule: Schedule) -> Result<SolverResult> {
    let span = makespan(&schedule, instance.job())?;
    Ok(SolverResult {
        status: SolveStatus::Feasible,
        makespan: Some(span),
        schedule: Some(schedule),
        interval: crate::bounds::BoundPair {
            lower: crate::bounds::search_bounds(instance).lower,
            upper: span,
        },
        nodes_explored: 0,
        bisection_iterations: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    SimpleMapreduce,
    OnestageMapreduce,
    RandomDag,
}

impl FamilyKind {
    /// Shape with `n_tasks` tasks in total. One-stage jobs split the tasks
    /// evenly, maps taking the odd one.
    pub fn sized(self, n_tasks: usize, edge_prob: f64) -> Result<Family> {
        let min = if self == FamilyKind::RandomDag { 1 } else { 2 };
        if n_tasks < min {
            return Err(Error::Config(format!("{self:?} needs at least {min} tasks")));
        }
        Ok(match self {
            FamilyKind::SimpleMapreduce => Family::SimpleMapreduce { n_map: n_tasks - 1 },
            FamilyKind::OnestageMapreduce => Family::OnestageMapreduce {
                n_map: n_tasks.div_ceil(2),
                n_reduce: n_tasks / 2,
            },
            FamilyKind::RandomDag => Family::RandomDag { n_tasks, edge_prob },
        })
    }
}

/// A rack count, or one rack per task of each instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RackCount {
    Fixed(u32),
    Tasks(PerTask),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerTask {
    Tasks,
}

impl RackCount {
    pub fn resolve(self, n_tasks: usize) -> u32 {
        match self {
            RackCount::Fixed(m) => m,
            RackCount::Tasks(_) => n_tasks as u32,
        }
    }
}

impl fmt::Display for RackCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RackCount::Fixed(m) => f.pad(&m.to_string()),
            RackCount::Tasks(_) => f.pad("tasks"),
        }
    }
}

fn default_tasks() -> (usize, usize) {
    (5, 10)
}
fn default_edge_prob() -> f64 {
    0.3
}
fn default_processing_range() -> (u64, u64) {
    (1, 100)
}
fn default_racks() -> Vec<RackCount> {
    (1..=10).map(RackCount::Fixed).collect()
}
fn default_subchannels() -> Vec<u32> {
    vec![0, 1, 2]
}
fn default_rho() -> Vec<f64> {
    vec![0.5]
}
fn default_instances() -> usize {
    30
}
fn default_schedulers() -> Vec<Scheduler> {
    vec![Scheduler::Exact]
}
fn default_node_limit() -> Option<u64> {
    Some(10_000_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: FamilyKind,
    /// Inclusive range the task count of each instance is drawn from.
    #[serde(default = "default_tasks")]
    pub tasks: (usize, usize),
    /// Random DAGs only.
    #[serde(default = "default_edge_prob")]
    pub edge_prob: f64,
    #[serde(default = "default_processing_range")]
    pub processing_range: (u64, u64),
    #[serde(default = "default_racks")]
    pub racks: Vec<RackCount>,
    #[serde(default = "default_subchannels")]
    pub subchannels: Vec<u32>,
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_schedulers")]
    pub schedulers: Vec<Scheduler>,
    #[serde(default = "default_node_limit")]
    pub node_limit: Option<u64>,
    #[serde(default)]
    pub time_limit_ms: Option<u64>,
    /// Record solve times in the CSV, which makes it non-reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(family: FamilyKind) -> Self {
        ExperimentSpec {
            family,
            tasks: default_tasks(),
            edge_prob: default_edge_prob(),
            processing_range: default_processing_range(),
            racks: default_racks(),
            subchannels: default_subchannels(),
            rho: default_rho(),
            instances: default_instances(),
            seed: 0,
            schedulers: default_schedulers(),
            node_limit: default_node_limit(),
            time_limit_ms: None,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.racks.is_empty() || self.subchannels.is_empty() || self.rho.is_empty() || self.schedulers.is_empty() {
            return bad("sweeps and scheduler list must be non-empty");
        }
        if self.instances == 0 {
            return bad("instances per cell must be at least 1");
        }
        let (lo, hi) = self.tasks;
        if lo == 0 || lo > hi {
            return bad("task range must be non-empty and positive");
        }
        if self.family != FamilyKind::RandomDag && lo < 2 {
            return bad("MapReduce jobs need at least 2 tasks");
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("edge probability must lie in [0, 1]");
        }
        if self.racks.contains(&RackCount::Fixed(0)) {
            return bad("rack counts must be positive");
        }
        for &rho in &self.rho {
            GenConfig { network_factor: rho, processing_range: self.processing_range, ..Default::default() }
                .validate()?;
        }
        self.solver_config().validate()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            node_limit: self.node_limit,
            time_limit: self.time_limit_ms.map(Duration::from_millis),
            deterministic_seed: None,
        }
    }

    /// Seed and task count of instance `i`. Both depend only on the spec
    /// seed and `i`, so every cell sees the same processing times.
    pub fn instance_seed(&self, i: usize) -> (u64, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let seed = rng.gen();
        let n = rng.gen_range(self.tasks.0..=self.tasks.1);
        (seed, n)
    }

    pub fn instance(&self, i: usize, rho: f64, racks: RackCount, subchannels: u32) -> Result<ProblemInstance> {
        let (seed, n) = self.instance_seed(i);
        let cfg = GenConfig {
            seed,
            network_factor: rho,
            processing_range: self.processing_range,
            network: Some(NetworkConfig::new(racks.resolve(n), subchannels)),
        };
        self.family.sized(n, self.edge_prob)?.generate(&cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance_id: usize,
    pub family: String,
    pub n_tasks: usize,
    pub racks: u32,
    pub subchannels: u32,
    pub rho: f64,
    pub scheduler: Scheduler,
    pub makespan: Option<u64>,
    pub status: String,
    pub solve_time: Option<f64>,
    pub nodes: u64,
}

/// Runs every (ρ, racks, instance) group, solving its subchannel counts in
/// ascending order. Each exact solve starts from the schedule found with
/// fewer subchannels, which stays valid, so its makespan never goes up as
/// subchannels are added.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut ks = spec.subchannels.clone();
    ks.sort_unstable();
    ks.dedup();
    let groups: Vec<(f64, RackCount, usize)> = spec
        .rho
        .iter()
        .flat_map(|&rho| spec.racks.iter().flat_map(move |&m| (0..spec.instances).map(move |i| (rho, m, i))))
        .collect();
    let per_group: Vec<Vec<(u32, Vec<ResultRow>)>> = groups
        .par_iter()
        .map(|&(rho, racks, i)| run_group(spec, &ks, rho, racks, i))
        .collect::<Result<_>>()?;

    // cell order: rho, racks, subchannels as listed; then instance, scheduler
    let mut rows = Vec::new();
    for (ri, _) in spec.rho.iter().enumerate() {
        for (mi, _) in spec.racks.iter().enumerate() {
            let base = (ri * spec.racks.len() + mi) * spec.instances;
            for &k in &spec.subchannels {
                for g in &per_group[base..base + spec.instances] {
                    let (_, r) = g.iter().find(|(gk, _)| *gk == k).expect("every k solved");
                    rows.extend(r.iter().cloned());
                }
            }
        }
    }
    Ok(rows)
}

fn run_group(spec: &ExperimentSpec, ks: &[u32], rho: f64, racks: RackCount, i: usize) -> Result<Vec<(u32, Vec<ResultRow>)>> {
    let cfg = spec.solver_config();
    let (seed, n) = spec.instance_seed(i);
    let mut carried: Option<Schedule> = None;
    let mut out = Vec::new();
    for &k in ks {
        let inst = spec.instance(i, rho, racks, k)?;
        let mut rows = Vec::new();
        for &sched in &spec.schedulers {
            let t = Instant::now();
            let res = match sched {
                Scheduler::Exact => solve_exact_from(&inst, &cfg, carried.as_ref()),
                other => other.run(&inst, &cfg, seed),
            };
            let elapsed = t.elapsed().as_secs_f64();
            if sched == Scheduler::Exact {
                if let Ok(r) = &res {
                    carried = r.schedule.clone();
                }
            }
            rows.push(row(spec, &inst, i, n, rho, k, sched, res, elapsed)?);
        }
        out.push((k, rows));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn row(
    spec: &ExperimentSpec,
    inst: &ProblemInstance,
    i: usize,
    n: usize,
    rho: f64,
    k: u32,
    scheduler: Scheduler,
    res: Result<SolverResult>,
    elapsed: f64,
) -> Result<ResultRow> {
    let (span, status, nodes) = match res {
        Ok(r) => {
            if let Some(s) = &r.schedule {
                if let Some(v) = validate_schedule(inst, s).first() {
                    return Err(Error::Precondition(format!("{scheduler} emitted an invalid schedule: {v}")));
                }
            }
            (r.makespan.map(TimeUnits::get), r.status.as_str(), r.nodes_explored)
        }
        Err(_) => (None, SolveStatus::Unknown.as_str(), 0),
    };
    Ok(ResultRow {
        instance_id: i,
        family: spec.family.sized(n, spec.edge_prob)?.name().to_string(),
        n_tasks: n,
        racks: inst.network().rack_count,
        subchannels: k,
        rho,
        scheduler,
        makespan: span,
        status: status.to_string(),
        solve_time: spec.timing.then_some(elapsed),
        nodes,
    })
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Means for one (ρ, racks, subchannels, scheduler) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub rho: f64,
    /// Rack entry as listed in the spec: a count or `tasks`.
    pub racks: String,
    pub subchannels: u32,
    pub scheduler: Scheduler,
    pub instances: usize,
    pub mean_makespan: Option<f64>,
    /// Mean of `(wired - m) / wired` over instances, where `wired` is the
    /// exact makespan of the same job without subchannels. `None` without
    /// a wired reference.
    pub mean_gain: Option<f64>,
}

/// Per-cell means over rows laid out as [`run_experiment`] emits them. Each
/// row is compared with the wired reference of its job under the same ρ and
/// rack entry: the exact row at zero subchannels if swept, else the
/// wired-only row.
pub fn summarize(spec: &ExperimentSpec, rows: &[ResultRow]) -> Result<Vec<CellSummary>> {
    let per_cell = spec.instances * spec.schedulers.len();
    let cells = spec.rho.len() * spec.racks.len() * spec.subchannels.len();
    if rows.len() != cells * per_cell {
        return Err(Error::Config(format!(
            "expected {} rows for this spec, got {}",
            cells * per_cell,
            rows.len()
        )));
    }
    let mut out = Vec::new();
    let mut chunks = rows.chunks(per_cell);
    for &rho in &spec.rho {
        for racks in &spec.racks {
            let group: Vec<&[ResultRow]> = chunks.by_ref().take(spec.subchannels.len()).collect();
            let wired: Vec<Option<u64>> = (0..spec.instances)
                .map(|i| {
                    let exact0 = spec
                        .subchannels
                        .iter()
                        .position(|&k| k == 0)
                        .and_then(|c| pick(group[c], i, spec, Scheduler::Exact));
                    exact0.or_else(|| group.iter().find_map(|c| pick(c, i, spec, Scheduler::WiredOnly)))
                })
                .collect();
            for (c, &k) in spec.subchannels.iter().enumerate() {
                for (j, &scheduler) in spec.schedulers.iter().enumerate() {
                    let (mut sum, mut n, mut gain, mut ng) = (0.0, 0, 0.0, 0);
                    for i in 0..spec.instances {
                        let Some(m) = group[c][i * spec.schedulers.len() + j].makespan else { continue };
                        sum += m as f64;
                        n += 1;
                        if let Some(w) = wired[i] {
                            gain += (w as f64 - m as f64) / w as f64;
                            ng += 1;
                        }
                    }
                    out.push(CellSummary {
                        rho,
                        racks: racks.to_string(),
                        subchannels: k,
                        scheduler,
                        instances: spec.instances,
                        mean_makespan: (n > 0).then(|| sum / n as f64),
                        mean_gain: (ng > 0).then(|| gain / ng as f64),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn pick(cell: &[ResultRow], i: usize, spec: &ExperimentSpec, scheduler: Scheduler) -> Option<u64> {
    let j = spec.schedulers.iter().position(|&s| s == scheduler)?;
    cell[i * spec.schedulers.len() + j].makespan
}

/// Fixed-width table of [`summarize`] output.
pub fn format_summary(cells: &[CellSummary]) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>3} {:<12} {:>5} {:>12} {:>8}\n",
        "rho", "racks", "K", "scheduler", "n", "makespan", "gain"
    );
    for c in cells {
        let span = c.mean_makespan.map_or("-".to_string(), |m| format!("{m:.2}"));
        let gain = c.mean_gain.map_or("-".to_string(), |g| format!("{:.2}%", 100.0 * g));
        out += &format!(
            "{:>6} {:>6} {:>3} {:<12} {:>5} {:>12} {:>8}\n",
            c.rho, c.racks, c.subchannels, c.scheduler, c.instances, span, gain
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            tasks: (3, 5),
            racks: vec![RackCount::Fixed(1), RackCount::Tasks(PerTask::Tasks)],
            subchannels: vec![0, 1],
            instances: 3,
            schedulers: vec![Scheduler::Exact, Scheduler::SingleRack],
            node_limit: Some(200_000),
            ..ExperimentSpec::new(FamilyKind::SimpleMapreduce)
        }
    }

    #[test]
    fn scheduler_names_round_trip() {
        for s in Scheduler::ALL {
            assert_eq!(s.as_str().parse::<Scheduler>().unwrap(), s);
        }
        assert!("optimal".parse::<Scheduler>().is_err());
    }

    #[test]
    fn spec_json_defaults_and_rack_keywords() {
        let spec = ExperimentSpec::from_json(r#"{"family": "random-dag", "racks": [2, "tasks"]}"#).unwrap();
        assert_eq!(spec.racks, vec![RackCount::Fixed(2), RackCount::Tasks(PerTask::Tasks)]);
        assert_eq!(spec.subchannels, vec![0, 1, 2]);
        assert_eq!(spec.instances, 30);
        assert_eq!(spec.node_limit, Some(10_000_000));
        assert!(ExperimentSpec::from_json(r#"{"family": "random-dag", "instances": 0}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"family": "random-dag", "rho": []}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"family": "random-dag", "bogus": 1}"#).is_err());
    }

    #[test]
    fn one_row_per_cell_instance_and_scheduler() {
        let spec = ExperimentSpec {
            racks: vec![RackCount::Fixed(2)],
            subchannels: vec![1],
            instances: 1,
            ..tiny_spec()
        };
        assert_eq!(run_experiment(&spec).unwrap().len(), 2);

        let spec = tiny_spec();
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3 * 2);
        for r in &rows {
            assert_eq!(r.makespan.is_some(), r.status == "optimal" || r.status == "feasible");
            assert!(r.solve_time.is_none());
        }
        // cells in spec order, then instance, then scheduler
        assert_eq!((rows[0].racks, rows[0].subchannels, rows[0].scheduler), (1, 0, Scheduler::Exact));
        assert_eq!(rows[1].scheduler, Scheduler::SingleRack);
        assert_eq!(rows[2].instance_id, 1);
        assert_eq!(rows[6].subchannels, 1);
    }

    #[test]
    fn csv_is_reproducible_and_readable() {
        let spec = tiny_spec();
        let mut a = Vec::new();
        write_csv(&run_experiment(&spec).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_experiment(&spec).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.starts_with(
            "instance_id,family,n_tasks,racks,subchannels,rho,scheduler,makespan,status,solve_time,nodes\n"
        ));
        assert_eq!(read_csv(&a[..]).unwrap(), run_experiment(&spec).unwrap());
    }

    #[test]
    fn gains_are_relative_to_zero_subchannels() {
        let spec = tiny_spec();
        let rows = run_experiment(&spec).unwrap();
        let cells = summarize(&spec, &rows).unwrap();
        assert!(summarize(&spec, &rows[1..]).is_err());
        assert_eq!(cells.len(), 2 * 2 * 2);
        for c in &cells {
            let g = c.mean_gain.unwrap();
            if c.scheduler == Scheduler::Exact {
                assert!(g >= 0.0);
                if c.subchannels == 0 {
                    assert_eq!(g, 0.0);
                }
            }
            if c.racks == "1" {
                assert_eq!(g, 0.0);
            }
        }
        let table = format_summary(&cells);
        assert_eq!(table.lines().count(), cells.len() + 1);
    }

    #[test]
    fn task_counts_cover_the_range() {
        let spec = ExperimentSpec::new(FamilyKind::RandomDag);
        let counts: std::collections::BTreeSet<usize> = (0..60).map(|i| spec.instance_seed(i).1).collect();
        assert_eq!(counts, (5..=10).collect());
    }

    #[test]
    fn instances_share_jobs_across_cells() {
        let spec = tiny_spec();
        let a = spec.instance(2, 0.5, RackCount::Fixed(1), 0).unwrap();
        let b = spec.instance(2, 0.5, RackCount::Fixed(3), 2).unwrap();
        assert_eq!(a.job(), b.job());
        let c = spec.instance(2, 5.0, RackCount::Fixed(1), 0).unwrap();
        assert_eq!(
            a.tasks().iter().map(|t| t.processing_time).collect::<Vec<_>>(),
            c.tasks().iter().map(|t| t.processing_time).collect::<Vec<_>>()
        );
    }
}
