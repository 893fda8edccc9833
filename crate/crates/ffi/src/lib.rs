//! C interface to the abelnet engine.
//!
//! Every object crosses the boundary as an opaque pointer that must be
//! released with its `*_free` function. Fallible calls return one of the
//! `ABN_*` status codes; on failure, [`abn_last_error_message`] describes
//! the most recent error on the calling thread. Panics never unwind into C:
//! they are reported as [`ABN_ERR_PANIC`].
//!
//! Vector getters follow one convention: pass a buffer and its length, and
//! the full length is stored in `*needed`. A null buffer (or a short one)
//! only reports the length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use abelnet::cli::{parse_network, NetworkBundle, Program, ProgramFile};
use abelnet::engine::{run, run_parallel, Policy, RunOptions, RunOutcome};
use abelnet::optimize::{solve_monotone, solve_toppling_ip, Solution, TopplingSolution};
use abelnet::verify::{check_abelian, DEFAULT_MAX_LEN};

pub const ABN_OK: i32 = 0;
/// A required pointer argument was null.
pub const ABN_ERR_NULL: i32 = -1;
/// A string argument was not valid UTF-8.
pub const ABN_ERR_UTF8: i32 = -2;
/// A network or program document failed to parse or build.
pub const ABN_ERR_PARSE: i32 = -3;
/// The engine reported an error while running or solving.
pub const ABN_ERR_RUN: i32 = -4;
/// An argument was out of range (unknown scheduler, zero workers, ...).
pub const ABN_ERR_ARG: i32 = -5;
/// A panic was caught at the boundary.
pub const ABN_ERR_PANIC: i32 = -6;

pub const ABN_HALTED: i32 = 0;
pub const ABN_NON_HALTING: i32 = 1;
pub const ABN_BUDGET_EXHAUSTED: i32 = 2;

pub const ABN_FEASIBLE: i32 = 0;
pub const ABN_INFEASIBLE: i32 = 1;
pub const ABN_UNKNOWN: i32 = 2;

/// A parsed network file with its input and starting states.
pub struct AbnNetwork {
    bundle: NetworkBundle,
}

/// The result of a run.
pub struct AbnOutcome {
    outcome: RunOutcome,
}

/// The result of solving a program file.
pub struct AbnSolution {
    status: i32,
    /// The least feasible vector (monotone programs) or topplings per vertex
    /// (toppling systems); empty unless feasible.
    minimizer: Vec<u64>,
    steps: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(i32, String);

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> i32 {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ABN_OK,
        Ok(Err(Fail(code, message))) => {
            set_error(message);
            code
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {what}"));
            ABN_ERR_PANIC
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(ABN_ERR_NULL, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(ABN_ERR_UTF8, format!("{what}: {e}")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(ABN_ERR_NULL, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(ABN_ERR_NULL, format!("{what} is null")))
}

unsafe fn copy_out(src: &[u64], buf: *mut u64, len: usize, needed: *mut usize) -> Result<(), Fail> {
    *out_ptr(needed, "needed")? = src.len();
    if !buf.is_null() && len >= src.len() {
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Parses a network document (TOML text). On success `*out` owns a new
/// network.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn abn_network_parse(toml: *const c_char, out: *mut *mut AbnNetwork) -> i32 {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let bundle = parse_network(text(toml, "toml")?).map_err(|e| Fail(ABN_ERR_PARSE, e.to_string()))?;
        *out = Box::into_raw(Box::new(AbnNetwork { bundle }));
        Ok(())
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must come from [`abn_network_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn abn_network_free(net: *mut AbnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of vertices.
///
/// # Safety
/// `net` must be a live network and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_network_vertex_count(net: *const AbnNetwork, out: *mut usize) -> i32 {
    guard(|| {
        *out_ptr(out, "out")? = obj(net, "net")?.bundle.network.vertex_count();
        Ok(())
    })
}

/// Total number of letters across all vertices; the length of an odometer.
///
/// # Safety
/// `net` must be a live network and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_network_alphabet_size(net: *const AbnNetwork, out: *mut usize) -> i32 {
    guard(|| {
        *out_ptr(out, "out")? = obj(net, "net")?.bundle.network.alphabet().len();
        Ok(())
    })
}

/// Runs the network from its file input and states. `scheduler` is one of
/// `fifo`, `lifo`, `rr`, `greedy` or `random:SEED`; null means `fifo`.
///
/// # Safety
/// `net` must be a live network, `scheduler` null or NUL-terminated, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_run(
    net: *const AbnNetwork,
    scheduler: *const c_char,
    budget: u64,
    out: *mut *mut AbnOutcome,
) -> i32 {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let b = &obj(net, "net")?.bundle;
        let policy = if scheduler.is_null() {
            Policy::Fifo
        } else {
            text(scheduler, "scheduler")?.parse().map_err(|e| Fail(ABN_ERR_ARG, e))?
        };
        let outcome = run(&b.network, &b.input, &b.states, &RunOptions::new(policy, budget))
            .map_err(|e| Fail(ABN_ERR_RUN, e.to_string()))?;
        *out = Box::into_raw(Box::new(AbnOutcome { outcome }));
        Ok(())
    })
}

/// Runs with `workers` threads; the outcome equals the `fifo` run.
///
/// # Safety
/// `net` must be a live network and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_run_parallel(
    net: *const AbnNetwork,
    workers: usize,
    seed: u64,
    budget: u64,
    out: *mut *mut AbnOutcome,
) -> i32 {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if workers == 0 {
            return Err(Fail(ABN_ERR_ARG, "workers must be at least 1".into()));
        }
        let b = &obj(net, "net")?.bundle;
        let outcome = run_parallel(&b.network, &b.input, &b.states, workers, seed, budget)
            .map_err(|e| Fail(ABN_ERR_RUN, e.to_string()))?;
        *out = Box::into_raw(Box::new(AbnOutcome { outcome }));
        Ok(())
    })
}

/// `ABN_HALTED`, `ABN_NON_HALTING` or `ABN_BUDGET_EXHAUSTED`; `ABN_ERR_NULL`
/// for a null outcome.
///
/// # Safety
/// `outcome` must be null or a live outcome.
#[no_mangle]
pub unsafe extern "C" fn abn_outcome_kind(outcome: *const AbnOutcome) -> i32 {
    match outcome.as_ref().map(|o| &o.outcome) {
        None => ABN_ERR_NULL,
        Some(RunOutcome::Halted(_)) => ABN_HALTED,
        Some(RunOutcome::NonHalting(_)) => ABN_NON_HALTING,
        Some(RunOutcome::BudgetExhausted(_)) => ABN_BUDGET_EXHAUSTED,
    }
}

/// Letters processed: the run length, or the step at which the repeated
/// configuration was seen again.
///
/// # Safety
/// `outcome` must be a live outcome and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_outcome_steps(outcome: *const AbnOutcome, out: *mut u64) -> i32 {
    guard(|| {
        *out_ptr(out, "out")? = match &obj(outcome, "outcome")?.outcome {
            RunOutcome::Halted(h) => h.steps,
            RunOutcome::NonHalting(c) => c.repeat_step,
            RunOutcome::BudgetExhausted(e) => e.steps,
        };
        Ok(())
    })
}

/// Copies the odometer (letters processed per letter). For a non-halting
/// outcome there is no odometer and `*needed` is set to 0.
///
/// # Safety
/// `outcome` must be a live outcome, `buf` null or valid for `len` writes,
/// and `needed` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_outcome_odometer(
    outcome: *const AbnOutcome,
    buf: *mut u64,
    len: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| {
        let odometer: &[u64] = match &obj(outcome, "outcome")?.outcome {
            RunOutcome::Halted(h) => &h.odometer.0,
            RunOutcome::BudgetExhausted(e) => &e.odometer.0,
            RunOutcome::NonHalting(_) => &[],
        };
        copy_out(odometer, buf, len, needed)
    })
}

/// Releases an outcome. Null is ignored.
///
/// # Safety
/// `outcome` must come from [`abn_run`] or [`abn_run_parallel`] and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn abn_outcome_free(outcome: *mut AbnOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Checks every vertex processor for abelianness with `trials` random
/// trials; `*failures` receives the number of vertices that failed.
///
/// # Safety
/// `net` must be a live network and `failures` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_check_abelian(
    net: *const AbnNetwork,
    trials: usize,
    seed: u64,
    failures: *mut usize,
) -> i32 {
    guard(|| {
        let failures = out_ptr(failures, "failures")?;
        let net = &obj(net, "net")?.bundle.network;
        *failures = net
            .processors()
            .iter()
            .filter(|p| !check_abelian(p.as_ref(), trials, DEFAULT_MAX_LEN, seed).passed())
            .count();
        Ok(())
    })
}

/// Solves a program document (a tabulated monotone map or a toppling
/// system).
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_solve_program(toml: *const c_char, budget: u64, out: *mut *mut AbnSolution) -> i32 {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let program = ProgramFile::parse(text(toml, "toml")?)
            .and_then(|p| p.build())
            .map_err(|e| Fail(ABN_ERR_PARSE, e.to_string()))?;
        let run_err = |e: abelnet::Error| Fail(ABN_ERR_RUN, e.to_string());
        let solution = match program {
            Program::Monotone(prog) => match solve_monotone(&prog, budget).map_err(run_err)? {
                Solution::Feasible { minimizer, steps, .. } => AbnSolution {
                    status: ABN_FEASIBLE,
                    minimizer,
                    steps,
                },
                s @ Solution::Infeasible { .. } => AbnSolution {
                    status: ABN_INFEASIBLE,
                    minimizer: Vec::new(),
                    steps: s.steps(),
                },
                Solution::Unknown { steps } => AbnSolution {
                    status: ABN_UNKNOWN,
                    minimizer: Vec::new(),
                    steps,
                },
            },
            Program::Toppling(sys) => match solve_toppling_ip(&sys, budget).map_err(run_err)? {
                TopplingSolution::Feasible { v, steps, .. } => AbnSolution {
                    status: ABN_FEASIBLE,
                    minimizer: v,
                    steps,
                },
                TopplingSolution::Infeasible { certificate } => AbnSolution {
                    status: ABN_INFEASIBLE,
                    minimizer: Vec::new(),
                    steps: certificate.repeat_step,
                },
                TopplingSolution::Unknown { steps } => AbnSolution {
                    status: ABN_UNKNOWN,
                    minimizer: Vec::new(),
                    steps,
                },
            },
        };
        *out = Box::into_raw(Box::new(solution));
        Ok(())
    })
}

/// `ABN_FEASIBLE`, `ABN_INFEASIBLE` or `ABN_UNKNOWN`; `ABN_ERR_NULL` for a
/// null solution.
///
/// # Safety
/// `solution` must be null or a live solution.
#[no_mangle]
pub unsafe extern "C" fn abn_solution_status(solution: *const AbnSolution) -> i32 {
    solution.as_ref().map_or(ABN_ERR_NULL, |s| s.status)
}

/// Engine steps taken by the solver.
///
/// # Safety
/// `solution` must be a live solution and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_solution_steps(solution: *const AbnSolution, out: *mut u64) -> i32 {
    guard(|| {
        *out_ptr(out, "out")? = obj(solution, "solution")?.steps;
        Ok(())
    })
}

/// Copies the minimizer; `*needed` is 0 unless the program is feasible.
///
/// # Safety
/// `solution` must be a live solution, `buf` null or valid for `len`
/// writes, and `needed` writable.
#[no_mangle]
pub unsafe extern "C" fn abn_solution_minimizer(
    solution: *const AbnSolution,
    buf: *mut u64,
    len: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| copy_out(&obj(solution, "solution")?.minimizer, buf, len, needed))
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from [`abn_solve_program`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn abn_solution_free(solution: *mut AbnSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// The last error on this thread, or null if the last call succeeded. The
/// string stays valid until the next `abn_*` call on the same thread.
#[no_mangle]
pub extern "C" fn abn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
