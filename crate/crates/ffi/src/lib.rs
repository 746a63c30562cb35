//! C ABI over `ydde`.
//!
//! Every function returns a [`YddeStatus`]. On failure the message is
//! available from [`ydde_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ydde::path::{counterexample_growth, holder_seminorm};
use ydde::scenario::Scenario;
use ydde::solver::{picard_solve, SolveReport};
use ydde::young::young_constant;
use ydde::{Error, GridPath};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YddeStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid numerical input, or a driver that could not be generated.
    Domain = 2,
    Config = 3,
    /// Picard stalled, or the driver is too rough for the mesh.
    Convergence = 4,
    /// Malformed CSV or UTF-8, or JSON outside a scenario.
    Parse = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

impl From<&Error> for YddeStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::Generation(_) => YddeStatus::Domain,
            Error::Config(_) => YddeStatus::Config,
            Error::NonConvergence { .. } | Error::TooRough { .. } => YddeStatus::Convergence,
            Error::Json(_) | Error::Csv(_) => YddeStatus::Parse,
            Error::Io(_) => YddeStatus::Io,
        }
    }
}

/// A scenario: coefficients, driver, initial segment and solver settings.
pub struct YddeScenario(Scenario);

/// A solved scenario.
pub struct YddeSolution {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: YddeStatus, msg: impl Into<String>) -> YddeStatus {
    set_error(msg);
    status
}

fn from_err(e: Error) -> YddeStatus {
    let s = YddeStatus::from(&e);
    fail(s, e.to_string())
}

/// Runs `f`, turning panics into [`YddeStatus::Panic`].
fn guard(f: impl FnOnce() -> YddeStatus) -> YddeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(YddeStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, YddeStatus> {
    if s.is_null() {
        return Err(fail(YddeStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(YddeStatus::Parse, format!("invalid UTF-8: {e}")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(YddeStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ydde_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ydde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ydde_scenario_from_json(json: *const c_char, out: *mut *mut YddeScenario) -> YddeStatus {
    guard(|| {
        non_null!(out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_json(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(YddeScenario(s)));
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// One of the built-in scenarios: zero, additive, linear, sin, logistic, decay.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ydde_scenario_builtin(name: *const c_char, out: *mut *mut YddeScenario) -> YddeStatus {
    guard(|| {
        non_null!(out);
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::builtin(name) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(YddeScenario(s)));
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Replaces the driver seed.
///
/// # Safety
/// `scenario` must come from a `ydde_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ydde_scenario_set_seed(scenario: *mut YddeScenario, seed: u64) -> YddeStatus {
    guard(|| {
        non_null!(scenario);
        let s = &mut (*scenario).0;
        s.driver.seed = seed;
        YddeStatus::Ok
    })
}

/// # Safety
/// `scenario` must be null or come from a `ydde_scenario_*` constructor, and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ydde_scenario_free(scenario: *mut YddeScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Generates the driver and runs the windowed Picard solver.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ydde_solve(scenario: *const YddeScenario, out: *mut *mut YddeSolution) -> YddeStatus {
    guard(|| {
        non_null!(scenario, out);
        let b = match (*scenario).0.build() {
            Ok(b) => b,
            Err(e) => return from_err(e),
        };
        match picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(YddeSolution { report }));
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// # Safety
/// `solution` must be null or come from [`ydde_solve`], and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn ydde_solution_free(solution: *mut YddeSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Grid of the solution on `[−r, T]`: node count, dimension, first time and
/// mesh. Any output pointer may be null.
///
/// # Safety
/// `solution` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_solution_grid(
    solution: *const YddeSolution,
    nodes: *mut usize,
    dim: *mut usize,
    t0: *mut f64,
    mesh: *mut f64,
) -> YddeStatus {
    guard(|| {
        non_null!(solution);
        let p: &GridPath = &(*solution).report.solution;
        if !nodes.is_null() {
            *nodes = p.len();
        }
        if !dim.is_null() {
            *dim = p.dim();
        }
        if !t0.is_null() {
            *t0 = p.t0();
        }
        if !mesh.is_null() {
            *mesh = p.mesh();
        }
        YddeStatus::Ok
    })
}

/// Copies node values, row-major (`nodes × dim`), into `buf`. Fails with
/// `Domain` when `cap` is too small; `written` receives the required length
/// either way.
///
/// # Safety
/// `buf` must hold `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_solution_copy_values(
    solution: *const YddeSolution,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> YddeStatus {
    guard(|| {
        non_null!(solution, written);
        let v = (*solution).report.solution.values();
        *written = v.len();
        if cap < v.len() {
            return fail(YddeStatus::Domain, format!("buffer holds {cap} values, need {}", v.len()));
        }
        non_null!(buf);
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        YddeStatus::Ok
    })
}

/// Partition summary: number of windows and stopping times `N(T)` (the
/// clamped final window excluded).
///
/// # Safety
/// `solution` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_solution_partition(
    solution: *const YddeSolution,
    windows: *mut usize,
    stopping_times: *mut usize,
) -> YddeStatus {
    guard(|| {
        non_null!(solution);
        let p = &(*solution).report.partition;
        if !windows.is_null() {
            *windows = p.windows();
        }
        if !stopping_times.is_null() {
            *stopping_times = p.count();
        }
        YddeStatus::Ok
    })
}

/// Growth-bound outcome: whether it holds at every node, and the smallest
/// margin.
///
/// # Safety
/// `solution` must be a live handle; `holds` and `min_margin` writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_solution_growth(
    solution: *const YddeSolution,
    holds: *mut bool,
    min_margin: *mut f64,
) -> YddeStatus {
    guard(|| {
        non_null!(solution, holds, min_margin);
        match &(*solution).report.growth {
            Some(g) => {
                *holds = g.holds;
                *min_margin = g.min_margin;
                YddeStatus::Ok
            }
            None => fail(YddeStatus::Domain, "growth bound was not evaluated"),
        }
    })
}

/// `K(β, ν) = 1 / (1 − 2^{1−(β+ν)})`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_young_constant(beta: f64, nu: f64, out: *mut f64) -> YddeStatus {
    guard(|| {
        non_null!(out);
        match young_constant(beta, nu) {
            Ok(k) => {
                *out = k;
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Grid `β`-Hölder seminorm of a path with `nodes` rows of `dim` values,
/// over its whole time span.
///
/// # Safety
/// `values` must hold `nodes * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_holder_seminorm(
    values: *const f64,
    nodes: usize,
    dim: usize,
    mesh: f64,
    beta: f64,
    out: *mut f64,
) -> YddeStatus {
    guard(|| {
        non_null!(values, out);
        let Some(len) = nodes.checked_mul(dim) else {
            return fail(YddeStatus::Domain, "nodes * dim overflows");
        };
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let r = GridPath::new(0.0, mesh, dim, v).and_then(|p| holder_seminorm(&p, beta, p.full_window()));
        match r {
            Ok(rep) => {
                *out = rep.seminorm;
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Partition sum for `x(t) = |t|^β` on the uniform `n`-partition of `[0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ydde_counterexample_growth(beta: f64, p: f64, n: usize, out: *mut f64) -> YddeStatus {
    guard(|| {
        non_null!(out);
        match counterexample_growth(beta, p, n) {
            Ok(v) => {
                *out = v;
                YddeStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}
