//! Exact makespan minimisation by bisection over feasibility searches.

mod search;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::baselines::{list_schedule, single_rack_schedule};
use crate::bounds::{search_bounds, BoundPair};
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Schedule};
use crate::time::TimeUnits;
use crate::validate::{makespan, validate_schedule};

pub(crate) use search::Prepared;
use search::{Budget, Outcome, Search};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverConfig {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Shuffles the order of equally early branches. `None` keeps the fixed
    /// order.
    pub deterministic_seed: Option<u64>,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_limit == Some(0) {
            return Err(Error::Config("node limit must be positive".into()));
        }
        if self.time_limit == Some(Duration::ZERO) {
            return Err(Error::Config("time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    /// A limit was hit; the schedule is the best found.
    Feasible,
    Infeasible,
    Unknown,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub schedule: Option<Schedule>,
    pub makespan: Option<TimeUnits>,
    pub interval: BoundPair,
    pub nodes_explored: u64,
    pub bisection_iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Schedule),
    Infeasible,
    Unknown,
}

fn budget(cfg: &SolverConfig) -> Budget {
    Budget {
        nodes: 0,
        node_limit: cfg.node_limit,
        deadline: cfg.time_limit.map(|d| Instant::now() + d),
    }
}

/// Looks for a schedule with makespan at most `level`.
///
/// Levels below the instance's lower bound are answered `Infeasible` without
/// searching.
pub fn solve_feasibility(
    instance: &ProblemInstance,
    level: TimeUnits,
    cfg: &SolverConfig,
) -> Result<Feasibility> {
    cfg.validate()?;
    let pr = Prepared::new(instance);
    let mut b = budget(cfg);
    Ok(feasibility_at(instance, &pr, level, &mut b, cfg.deterministic_seed))
}

fn feasibility_at(
    instance: &ProblemInstance,
    pr: &Prepared,
    level: TimeUnits,
    b: &mut Budget,
    seed: Option<u64>,
) -> Feasibility {
    if level < search_bounds(instance).lower {
        return Feasibility::Infeasible;
    }
    match Search::new(pr, level.0, b, seed).run() {
        Outcome::Found(s) => Feasibility::Feasible(s),
        Outcome::Exhausted => Feasibility::Infeasible,
        Outcome::LimitHit => Feasibility::Unknown,
    }
}

/// Minimum makespan by bisection between the network lower bound and the
/// best schedule found so far, starting from the better of the single-rack
/// and list schedules.
pub fn solve_exact(instance: &ProblemInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_exact_from(instance, cfg, None)
}

/// [`solve_exact`] seeded with a known schedule, which must be valid for
/// `instance`. The result is never worse than the seed, even when a limit
/// cuts the search short.
pub fn solve_exact_from(
    instance: &ProblemInstance,
    cfg: &SolverConfig,
    incumbent: Option<&Schedule>,
) -> Result<SolverResult> {
    cfg.validate()?;
    let pr = Prepared::new(instance);
    let mut b = budget(cfg);

    let mut best = single_rack_schedule(instance)?;
    let mut hi = makespan(&best, instance.job())?;
    let mut candidates = vec![list_schedule(instance)];
    if let Some(s) = incumbent {
        let violations = validate_schedule(instance, s);
        if let Some(v) = violations.first() {
            return Err(Error::Precondition(format!("incumbent schedule is invalid: {v}")));
        }
        candidates.push(s.clone());
    }
    for s in candidates {
        let span = makespan(&s, instance.job())?;
        if span < hi {
            (best, hi) = (s, span);
        }
    }
    let mut lo = search_bounds(instance).lower;
    let mut iterations = 0;
    let mut limited = false;

    while lo < hi {
        iterations += 1;
        let level = TimeUnits((lo.0 + hi.0) / 2);
        match feasibility_at(instance, &pr, level, &mut b, cfg.deterministic_seed) {
            Feasibility::Feasible(s) => {
                hi = makespan(&s, instance.job())?;
                best = s;
            }
            Feasibility::Infeasible => lo = level + TimeUnits(1),
            Feasibility::Unknown => {
                limited = true;
                break;
            }
        }
    }

    Ok(SolverResult {
        status: if limited { SolveStatus::Feasible } else { SolveStatus::Optimal },
        makespan: Some(hi),
        schedule: Some(best),
        interval: BoundPair { lower: lo, upper: hi },
        nodes_explored: b.nodes,
        bisection_iterations: iterations,
    })
}

/// [`solve_exact`] with the wireless subchannels removed.
pub fn solve_wired_only(instance: &ProblemInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    let net = instance.network().with_subchannels(0);
    solve_exact(&instance.with_network(net)?, cfg)
}
