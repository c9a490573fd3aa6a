//! C ABI over `ridgeapprox`.
//!
//! Problems and solutions are opaque heap handles created by
//! `ra_problem_from_config` / `ra_solve` and released with the matching
//! `*_free`. Every fallible call returns an [`RaStatus`]; on failure a
//! description is available from `ra_last_error_message` on the same thread.
//! Component indices are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ridgeapprox::oracle::{compare, run_oracle};
use ridgeapprox::solution::SolveError;
use ridgeapprox::{characterization_defect, ApproxSolution, Error, Problem, ProblemConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Config text could not be parsed or is inconsistent.
    Config = 3,
    /// Dependent directions, vanishing slice mass, evaluation failure.
    Numerical = 4,
    /// The fixed-point solver stopped at its sweep limit; the solution handle
    /// is still produced.
    NotConverged = 5,
    /// Component index out of range or buffer length mismatch.
    OutOfRange = 6,
    /// The instance exceeds the oracle size limit.
    TooLarge = 7,
    Panic = 8,
}

/// Opaque problem handle.
pub struct RaProblem {
    inner: Problem,
}

/// Opaque solution handle.
pub struct RaSolution {
    inner: ApproxSolution,
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

fn status_of(err: &Error) -> RaStatus {
    match err.exit_code() {
        1 => RaStatus::Config,
        3 => RaStatus::NotConverged,
        5 => RaStatus::TooLarge,
        _ => RaStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> RaStatus) -> RaStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RaStatus::Panic
        }
    }
}

fn fail(status: RaStatus, message: impl Into<String>) -> RaStatus {
    set_error(message);
    status
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `ra_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ra_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a config (same text format as the CLI) and samples the problem.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_problem_from_config(text: *const c_char, out: *mut *mut RaProblem) -> RaStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(RaStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(RaStatus::InvalidUtf8, "config text is not UTF-8");
        };
        let config = match ProblemConfig::parse(text) {
            Ok(c) => c,
            Err(e) => return fail(RaStatus::Config, e.to_string()),
        };
        match Problem::from_config(config) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(RaProblem { inner: problem }));
                RaStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `problem` must come from `ra_problem_from_config` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ra_problem_free(problem: *mut RaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_problem_dims(
    problem: *const RaProblem,
    n: *mut usize,
    r: *mut usize,
    q: *mut usize,
) -> RaStatus {
    guard(|| {
        let (Some(p), false, false, false) = (problem.as_ref(), n.is_null(), r.is_null(), q.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        let dom = p.inner.domain();
        *n = dom.dim();
        *r = dom.ridge_count();
        *q = dom.order();
        RaStatus::Ok
    })
}

/// `det J` of the completed basis.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_problem_det(problem: *const RaProblem, out: *mut f64) -> RaStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), out.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        *out = p.inner.basis().det();
        RaStatus::Ok
    })
}

/// Gauss nodes of ridge axis `axis` into `buf`, which must hold exactly `q`
/// values.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ra_problem_nodes(
    problem: *const RaProblem,
    axis: usize,
    buf: *mut f64,
    len: usize,
) -> RaStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), buf.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        let dom = p.inner.domain();
        if axis >= dom.ridge_count() || len != dom.order() {
            return fail(RaStatus::OutOfRange, "axis or buffer length out of range");
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&dom.rule(axis).nodes);
        RaStatus::Ok
    })
}

/// Solves the problem. On `RA_STATUS_NOT_CONVERGED` the last iterate is
/// still returned through `out`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_solve(
    problem: *const RaProblem,
    force_fixed_point: bool,
    out: *mut *mut RaSolution,
) -> RaStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), out.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        let (solution, status) = match p.inner.solve(force_fixed_point) {
            Ok(sol) => (sol, RaStatus::Ok),
            Err(SolveError::NotConverged {
                sweeps,
                last_change,
                solution,
            }) => {
                set_error(format!(
                    "no convergence after {sweeps} sweeps (last change {last_change:e})"
                ));
                (*solution, RaStatus::NotConverged)
            }
            Err(e) => return fail(RaStatus::Numerical, e.to_string()),
        };
        *out = Box::into_raw(Box::new(RaSolution { inner: solution }));
        status
    })
}

/// # Safety
/// `solution` must come from `ra_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ra_solution_free(solution: *mut RaSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// The approximation error `E(f)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_solution_error(solution: *const RaSolution, out: *mut f64) -> RaStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), out.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        *out = s.inner.error;
        RaStatus::Ok
    })
}

/// The error recomputed from the residual norm.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_solution_residual_error(solution: *const RaSolution, out: *mut f64) -> RaStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), out.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        *out = s.inner.residual_error;
        RaStatus::Ok
    })
}

/// Values of component `axis` at its Gauss nodes; `len` must equal `q`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ra_solution_component(
    solution: *const RaSolution,
    axis: usize,
    buf: *mut f64,
    len: usize,
) -> RaStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), buf.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        let Some(g) = s.inner.components.get(axis) else {
            return fail(RaStatus::OutOfRange, format!("no component {axis}"));
        };
        if len != g.values.len() {
            return fail(
                RaStatus::OutOfRange,
                format!("buffer holds {len} values, component has {}", g.values.len()),
            );
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&g.values);
        RaStatus::Ok
    })
}

/// Worst optimality defect of `solution` for `problem`: the orthogonality
/// defect, and for unit weights also the marginal characterization.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_verify(
    problem: *const RaProblem,
    solution: *const RaSolution,
    out_defect: *mut f64,
) -> RaStatus {
    guard(|| {
        let (Some(p), Some(s), false) = (problem.as_ref(), solution.as_ref(), out_defect.is_null()) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        if s.inner.components.len() != p.inner.domain().ridge_count() {
            return fail(RaStatus::OutOfRange, "solution does not match problem");
        }
        let mut worst = p.inner.weighted().verify_extremality(&s.inner.components);
        if p.inner.weighted().has_unit_weights() {
            worst = worst.worst(characterization_defect(&s.inner.components, p.inner.f_star()));
        }
        *out_defect = worst.value;
        RaStatus::Ok
    })
}

/// Runs the dense least-squares oracle and reports the gaps to `solution`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ra_oracle_compare(
    problem: *const RaProblem,
    solution: *const RaSolution,
    error_gap: *mut f64,
    approximant_gap: *mut f64,
) -> RaStatus {
    guard(|| {
        let (Some(p), Some(s), false, false) = (
            problem.as_ref(),
            solution.as_ref(),
            error_gap.is_null(),
            approximant_gap.is_null(),
        ) else {
            return fail(RaStatus::NullPointer, "null argument");
        };
        if p.inner.domain().node_count() as u128 > ridgeapprox::cli::ORACLE_NODE_LIMIT {
            return fail(RaStatus::TooLarge, "instance too large for the oracle");
        }
        if s.inner.components.len() != p.inner.domain().ridge_count() {
            return fail(RaStatus::OutOfRange, "solution does not match problem");
        }
        let oracle = run_oracle(p.inner.weighted());
        let report = compare(p.inner.weighted(), &s.inner, &oracle);
        *error_gap = report.error_gap;
        *approximant_gap = report.approximant_gap;
        RaStatus::Ok
    })
}
