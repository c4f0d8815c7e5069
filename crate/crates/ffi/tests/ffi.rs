use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hybridsched_ffi::*;

// Two unit chains whose transfers take 4 ticks on either medium and 100
// locally. The wired channel alone has to serialise them.
const PC: &str = r#"{
  "tasks": [{"id": 1, "p": 1}, {"id": 2, "p": 1}, {"id": 3, "p": 1}, {"id": 4, "p": 1}],
  "edges": [{"u": 1, "v": 2, "d": 4, "r": 100}, {"u": 3, "v": 4, "d": 4, "r": 100}],
  "network": {"racks": 4, "subchannels": 1, "wired_bw": 1000, "wireless_bw": 1000}
}"#;

struct Inst(*mut HsInstance);

impl Drop for Inst {
    fn drop(&mut self) {
        unsafe { hs_instance_free(self.0) }
    }
}

fn load(json: &str) -> Inst {
    let text = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { hs_instance_from_json(text.as_ptr(), &mut h) };
    assert_eq!(st, HsStatus::Ok, "{}", last_error());
    Inst(h)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hs_last_error()) }.to_string_lossy().into_owned()
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { hs_string_free(s) };
    text
}

fn solve(inst: &Inst, which: HsScheduler) -> *mut HsSolution {
    let mut sol = ptr::null_mut();
    let limits = HsLimits { node_limit: 0, time_limit_ms: 0, seed: 3 };
    assert_eq!(unsafe { hs_solve(inst.0, which, &limits, &mut sol) }, HsStatus::Ok);
    sol
}

fn span(sol: *const HsSolution) -> u64 {
    let mut m = 0;
    assert_eq!(unsafe { hs_solution_makespan(sol, &mut m) }, HsStatus::Ok);
    m
}

#[test]
fn instance_round_trip_and_size() {
    let inst = load(PC);
    let (mut t, mut e) = (0, 0);
    assert_eq!(unsafe { hs_instance_size(inst.0, &mut t, &mut e) }, HsStatus::Ok);
    assert_eq!((t, e), (4, 2));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hs_instance_to_json(inst.0, &mut json) }, HsStatus::Ok);
    let again = load(&take(json));
    let mut json = ptr::null_mut();
    unsafe { hs_instance_to_json(again.0, &mut json) };
    assert!(take(json).contains("\"subchannels\": 1"));
}

#[test]
fn bounds_bracket_the_optimum() {
    let inst = load(PC);
    let (mut lo, mut hi) = (0, 0);
    assert_eq!(unsafe { hs_bounds(inst.0, &mut lo, &mut hi) }, HsStatus::Ok);
    let sol = solve(&inst, HsScheduler::Exact);
    let best = span(sol);
    assert!(lo <= best && best <= hi, "{lo} {best} {hi}");
    unsafe { hs_solution_free(sol) };
}

#[test]
fn exact_beats_wired_only_and_validates() {
    let inst = load(PC);
    let exact = solve(&inst, HsScheduler::Exact);
    let wired = solve(&inst, HsScheduler::WiredOnly);
    let mut st = HsSolveStatus::Unknown;
    unsafe { hs_solution_status(exact, &mut st) };
    assert_eq!(st, HsSolveStatus::Optimal);
    assert_eq!((span(exact), span(wired)), (6, 10));

    let mut nodes = 0;
    assert_eq!(unsafe { hs_solution_nodes(exact, &mut nodes) }, HsStatus::Ok);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hs_solution_schedule_json(exact, &mut json) }, HsStatus::Ok);
    let schedule = CString::new(take(json)).unwrap();
    let mut count = usize::MAX;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { hs_validate(inst.0, schedule.as_ptr(), &mut count, &mut report) }, HsStatus::Ok);
    assert_eq!(count, 0);
    assert_eq!(take(report), "");
    unsafe {
        hs_solution_free(exact);
        hs_solution_free(wired);
    }
}

#[test]
fn every_scheduler_returns_a_schedule() {
    let inst = load(PC);
    for which in [
        HsScheduler::Exact,
        HsScheduler::WiredOnly,
        HsScheduler::List,
        HsScheduler::Random,
        HsScheduler::SingleRack,
    ] {
        let sol = solve(&inst, which);
        assert!(span(sol) >= 6, "{which:?}");
        unsafe { hs_solution_free(sol) };
    }
}

#[test]
fn validate_reports_broken_schedules() {
    let inst = load(PC);
    let bad = CString::new(r#"{"tasks": [{"id": 1, "rack": 1, "start": 0}], "edges": []}"#).unwrap();
    let mut count = 0;
    let mut report = ptr::null_mut();
    let st = unsafe { hs_validate(inst.0, bad.as_ptr(), &mut count, &mut report) };
    assert_eq!(st, HsStatus::Ok);
    assert!(count > 0);
    assert_eq!(take(report).lines().count(), count);

    let garbled = CString::new("[").unwrap();
    let st = unsafe { hs_validate(inst.0, garbled.as_ptr(), &mut count, ptr::null_mut()) };
    assert_eq!(st, HsStatus::InvalidInput);
}

#[test]
fn level_queries() {
    let inst = load(PC);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { hs_solve_level(inst.0, 6, ptr::null(), &mut sol) }, HsStatus::Ok);
    let mut st = HsSolveStatus::Unknown;
    unsafe { hs_solution_status(sol, &mut st) };
    assert_eq!(st, HsSolveStatus::Feasible);
    assert!(span(sol) <= 6);
    unsafe { hs_solution_free(sol) };

    assert_eq!(unsafe { hs_solve_level(inst.0, 5, ptr::null(), &mut sol) }, HsStatus::Ok);
    unsafe { hs_solution_status(sol, &mut st) };
    assert_eq!(st, HsSolveStatus::Infeasible);
    let mut m = 0;
    assert_eq!(unsafe { hs_solution_makespan(sol, &mut m) }, HsStatus::NotAvailable);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hs_solution_schedule_json(sol, &mut json) }, HsStatus::NotAvailable);
    assert!(json.is_null());
    unsafe { hs_solution_free(sol) };
}

#[test]
fn export_lp_models() {
    let inst = load(PC);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hs_export_lp(inst.0, false, 0, &mut out) }, HsStatus::Ok);
    let lp = take(out);
    assert!(lp.contains("Minimize") && lp.trim_end().ends_with("End"));

    assert_eq!(unsafe { hs_export_lp(inst.0, true, 6, &mut out) }, HsStatus::Ok);
    assert!(take(out).contains("Minimize\n obj:\nSubject To"));

    assert_eq!(unsafe { hs_export_lp(inst.0, true, 0, &mut out) }, HsStatus::InvalidInput);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn invalid_instances_are_rejected() {
    let cyclic = CString::new(
        r#"{"tasks": [{"id": 1, "p": 1}, {"id": 2, "p": 1}],
            "edges": [{"u": 1, "v": 2, "d": 0, "r": 0}, {"u": 2, "v": 1, "d": 0, "r": 0}],
            "network": {"racks": 2, "subchannels": 0, "wired_bw": 1000, "wireless_bw": 1000}}"#,
    )
    .unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { hs_instance_from_json(cyclic.as_ptr(), &mut h) }, HsStatus::InvalidInput);
    assert!(h.is_null());
    assert!(last_error().contains("invalid job graph"));

    // a later successful call clears the message
    let _ok = load(PC);
    assert_eq!(last_error(), "");
}

#[test]
fn null_handles_are_safe() {
    unsafe {
        hs_instance_free(ptr::null_mut());
        hs_solution_free(ptr::null_mut());
        hs_string_free(ptr::null_mut());
    }
    let mut sol = ptr::null_mut();
    let st = unsafe { hs_solve(ptr::null(), HsScheduler::Exact, ptr::null(), &mut sol) };
    assert_eq!(st, HsStatus::NullPointer);
    let inst = load(PC);
    let st = unsafe { hs_solve(inst.0, HsScheduler::Exact, ptr::null(), ptr::null_mut()) };
    assert_eq!(st, HsStatus::NullPointer);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hybridsched.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct HsInstance HsInstance;",
        "typedef struct HsSolution HsSolution;",
        "HS_STATUS_OK = 0",
        "HS_STATUS_NOT_AVAILABLE",
        "HS_SCHEDULER_SINGLE_RACK",
        "hs_instance_from_json",
        "hs_solve_level",
        "hs_export_lp",
        "hs_last_error",
        "hs_string_free",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

// Compiles and runs a C program against the header and the static library.
// Skipped when no C compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipped");
        return;
    }
    // tests only build the rlib; the static library needs its own build
    let built = Command::new(env!("CARGO"))
        .args(["build", "--profile", "test", "--lib", "-p", "hybridsched-ffi", "--message-format", "short"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .unwrap();
    assert!(built.success());
    // the test binary sits in target/<profile>/deps; the library one level up
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("libhybridsched_ffi.a");
    assert!(lib.exists(), "{}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let json = PC.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
    std::fs::write(
        &src,
        format!(
            r#"#include <stdio.h>
#include "hybridsched.h"
int main(void) {{
    HsInstance *inst = NULL;
    if (hs_instance_from_json("{json}", &inst) != HS_STATUS_OK) {{ puts(hs_last_error()); return 1; }}
    HsLimits limits = {{0, 0, 0}};
    HsSolution *sol = NULL;
    if (hs_solve(inst, HS_SCHEDULER_EXACT, &limits, &sol) != HS_STATUS_OK) return 2;
    uint64_t span = 0;
    hs_solution_makespan(sol, &span);
    printf("%llu\n", (unsigned long long)span);
    hs_solution_free(sol);
    hs_instance_free(inst);
    return 0;
}}
"#
        ),
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "6");
}
