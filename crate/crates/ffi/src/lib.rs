//! C interface to the hybridsched scheduler.
//!
//! Instances and solutions are opaque handles owned by the caller and released
//! with their `_free` function. Strings returned through out-parameters are
//! owned by the caller and released with [`hs_string_free`]. Every fallible
//! call returns an [`HsStatus`]; on failure [`hs_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use hybridsched::bounds::search_bounds;
use hybridsched::encoder::{build_fp, build_rp, write_lp, EncoderConfig};
use hybridsched::experiment::Scheduler;
use hybridsched::io::{instance_from_json, instance_to_json, schedule_from_json, schedule_to_json};
use hybridsched::solver::{solve_feasibility, Feasibility, SolveStatus, SolverConfig};
use hybridsched::validate::{makespan, validate_schedule};
use hybridsched::{ProblemInstance, Schedule, TimeUnits};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, an invalid instance or schedule, or a bad argument.
    InvalidInput = 3,
    /// The requested object does not exist, such as the schedule of an
    /// infeasible solution.
    NotAvailable = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsScheduler {
    Exact = 0,
    WiredOnly = 1,
    List = 2,
    Random = 3,
    SingleRack = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsSolveStatus {
    Optimal = 0,
    /// A limit was hit; the schedule is the best found.
    Feasible = 1,
    Infeasible = 2,
    Unknown = 3,
}

/// Search limits. Zero means no limit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HsLimits {
    pub node_limit: u64,
    pub time_limit_ms: u64,
    /// Seeds the random baseline and tie-breaking in the exact search.
    pub seed: u64,
}

pub struct HsInstance {
    inner: ProblemInstance,
}

pub struct HsSolution {
    status: HsSolveStatus,
    schedule: Option<Schedule>,
    makespan: Option<TimeUnits>,
    nodes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(HsStatus, String);

impl From<hybridsched::Error> for Fail {
    fn from(e: hybridsched::Error) -> Self {
        Fail(HsStatus::InvalidInput, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HsStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside hybridsched");
            HsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(HsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(HsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(HsStatus::Panic, "string contains a NUL byte".into()))
}

fn solver_config(limits: &HsLimits) -> SolverConfig {
    SolverConfig {
        node_limit: (limits.node_limit > 0).then_some(limits.node_limit),
        time_limit: (limits.time_limit_ms > 0).then(|| Duration::from_millis(limits.time_limit_ms)),
        deterministic_seed: Some(limits.seed),
    }
}

fn scheduler(s: HsScheduler) -> Scheduler {
    match s {
        HsScheduler::Exact => Scheduler::Exact,
        HsScheduler::WiredOnly => Scheduler::WiredOnly,
        HsScheduler::List => Scheduler::List,
        HsScheduler::Random => Scheduler::Random,
        HsScheduler::SingleRack => Scheduler::SingleRack,
    }
}

fn solve_status(s: SolveStatus) -> HsSolveStatus {
    match s {
        SolveStatus::Optimal => HsSolveStatus::Optimal,
        SolveStatus::Feasible => HsSolveStatus::Feasible,
        SolveStatus::Infeasible => HsSolveStatus::Infeasible,
        SolveStatus::Unknown => HsSolveStatus::Unknown,
    }
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn hs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hs_instance_from_json(json: *const c_char, out: *mut *mut HsInstance) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = instance_from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(HsInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from [`hs_instance_from_json`] and not be freed yet, or be
/// null.
#[no_mangle]
pub unsafe extern "C" fn hs_instance_free(inst: *mut HsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Serialises the instance in its canonical JSON form.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hs_instance_to_json(inst: *const HsInstance, out: *mut *mut c_char) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        *out = into_c_string(instance_to_json(&handle(inst, "inst")?.inner))?;
        Ok(())
    })
}

/// # Safety
/// `inst` must be a live handle and the out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn hs_instance_size(
    inst: *const HsInstance,
    tasks: *mut usize,
    edges: *mut usize,
) -> HsStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        *out_arg(tasks, "tasks")? = inst.tasks().len();
        *out_arg(edges, "edges")? = inst.edges().len();
        Ok(())
    })
}

/// Bounds that bracket the optimal makespan in ticks.
///
/// # Safety
/// `inst` must be a live handle and the out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn hs_bounds(inst: *const HsInstance, lower: *mut u64, upper: *mut u64) -> HsStatus {
    guard(|| {
        let b = search_bounds(&handle(inst, "inst")?.inner);
        *out_arg(lower, "lower")? = b.lower.get();
        *out_arg(upper, "upper")? = b.upper.get();
        Ok(())
    })
}

/// Runs a scheduler. A null `limits` means no limits and seed 0.
///
/// # Safety
/// `inst` must be a live handle, `limits` null or valid, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solve(
    inst: *const HsInstance,
    which: HsScheduler,
    limits: *const HsLimits,
    out: *mut *mut HsSolution,
) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = &handle(inst, "inst")?.inner;
        let limits = limits.as_ref().copied().unwrap_or_default();
        let r = scheduler(which).run(inst, &solver_config(&limits), limits.seed)?;
        let sol = HsSolution {
            status: solve_status(r.status),
            makespan: r.makespan,
            schedule: r.schedule.map(Schedule::canonical),
            nodes: r.nodes_explored,
        };
        *out = Box::into_raw(Box::new(sol));
        Ok(())
    })
}

/// Decides whether a schedule with makespan at most `level` ticks exists.
/// The solution is `Feasible` with a schedule, `Infeasible`, or `Unknown`
/// when a limit stopped the search.
///
/// # Safety
/// `inst` must be a live handle, `limits` null or valid, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solve_level(
    inst: *const HsInstance,
    level: u64,
    limits: *const HsLimits,
    out: *mut *mut HsSolution,
) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = &handle(inst, "inst")?.inner;
        let limits = limits.as_ref().copied().unwrap_or_default();
        let sol = match solve_feasibility(inst, TimeUnits(level), &solver_config(&limits))? {
            Feasibility::Feasible(s) => HsSolution {
                status: HsSolveStatus::Feasible,
                makespan: Some(makespan(&s, inst.job())?),
                schedule: Some(s.canonical()),
                nodes: 0,
            },
            Feasibility::Infeasible => {
                HsSolution { status: HsSolveStatus::Infeasible, makespan: None, schedule: None, nodes: 0 }
            }
            Feasibility::Unknown => {
                HsSolution { status: HsSolveStatus::Unknown, makespan: None, schedule: None, nodes: 0 }
            }
        };
        *out = Box::into_raw(Box::new(sol));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`hs_solve`] or [`hs_solve_level`] and not be freed
/// yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn hs_solution_free(sol: *mut HsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle and `status` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solution_status(sol: *const HsSolution, status: *mut HsSolveStatus) -> HsStatus {
    guard(|| {
        *out_arg(status, "status")? = handle(sol, "sol")?.status;
        Ok(())
    })
}

/// Makespan in ticks. `NotAvailable` when there is no schedule.
///
/// # Safety
/// `sol` must be a live handle and `makespan` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solution_makespan(sol: *const HsSolution, makespan: *mut u64) -> HsStatus {
    guard(|| {
        let sol = handle(sol, "sol")?;
        let m = sol.makespan.ok_or_else(|| Fail(HsStatus::NotAvailable, "solution has no schedule".into()))?;
        *out_arg(makespan, "makespan")? = m.get();
        Ok(())
    })
}

/// Search nodes explored; zero for heuristics.
///
/// # Safety
/// `sol` must be a live handle and `nodes` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solution_nodes(sol: *const HsSolution, nodes: *mut u64) -> HsStatus {
    guard(|| {
        *out_arg(nodes, "nodes")? = handle(sol, "sol")?.nodes;
        Ok(())
    })
}

/// The schedule as JSON. `NotAvailable` when there is none.
///
/// # Safety
/// `sol` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_solution_schedule_json(sol: *const HsSolution, out: *mut *mut c_char) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = handle(sol, "sol")?
            .schedule
            .as_ref()
            .ok_or_else(|| Fail(HsStatus::NotAvailable, "solution has no schedule".into()))?;
        *out = into_c_string(schedule_to_json(s))?;
        Ok(())
    })
}

/// Checks a JSON schedule against an instance. `violations` receives the
/// number of broken rules; when `report` is not null it receives one line per
/// violation.
///
/// # Safety
/// `inst` must be a live handle, `schedule_json` NUL-terminated, `violations`
/// valid and `report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn hs_validate(
    inst: *const HsInstance,
    schedule_json: *const c_char,
    violations: *mut usize,
    report: *mut *mut c_char,
) -> HsStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        let count = out_arg(violations, "violations")?;
        let report = report.as_mut();
        let schedule = schedule_from_json(str_arg(schedule_json, "schedule_json")?)?;
        let found = validate_schedule(inst, &schedule);
        *count = found.len();
        if let Some(r) = report {
            *r = into_c_string(found.iter().map(|v| format!("{v}\n")).collect())?;
        }
        Ok(())
    })
}

/// Writes the MILP model in LP format: the minimisation model when
/// `has_level` is false, else the feasibility model at makespan cap `level`.
///
/// # Safety
/// `inst` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hs_export_lp(
    inst: *const HsInstance,
    has_level: bool,
    level: u64,
    out: *mut *mut c_char,
) -> HsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = &handle(inst, "inst")?.inner;
        let bounds = search_bounds(inst);
        let cfg = EncoderConfig::default();
        let model = if has_level {
            build_fp(inst, bounds, TimeUnits(level), &cfg)?
        } else {
            build_rp(inst, bounds, &cfg)?
        };
        *out = into_c_string(write_lp(&model))?;
        Ok(())
    })
}

/// # Safety
/// `s` must be a string returned by this library and not freed yet, or null.
#[no_mangle]
pub unsafe extern "C" fn hs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
