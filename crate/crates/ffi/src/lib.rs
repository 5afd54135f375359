//! C interface to the crowdcomp solvers.
//!
//! Instances and plans are opaque heap handles released with their `_free`
//! function. Every call returns a [`CcStatus`]; on failure a message is kept
//! per thread and read with [`cc_last_error`]. Strings returned through out
//! pointers are owned by the caller and released with [`cc_string_free`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crowdcomp::acceptance::{lambert_w0, optimal_compensation_linear, SolverConfig};
use crowdcomp::assignment::solve_two_phase;
use crowdcomp::gen::{generate, GenConfig};
use crowdcomp::json::{instance_from_json, instance_to_json, load_instance, plan_to_json};
use crowdcomp::model::{Allocation, ModelKind, OfferPlan, ProblemInstance};
use crowdcomp::nonsep::{constraints_from_json, solve_nonsep, MilpStatus, NonSepOptions};
use crowdcomp::schemes::{plan_for_scheme, SchemeKind};
use crowdcomp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Schema = 4,
    InvalidInstance = 5,
    InvalidPlan = 6,
    Solver = 7,
    Infeasible = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcModel {
    Linear = 0,
    Logistic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcScheme {
    Individual = 0,
    Detour = 1,
    Distance = 2,
    Flat = 3,
}

/// Opaque problem instance.
pub struct CcInstance {
    inner: ProblemInstance,
}

/// Opaque solution plan.
pub struct CcPlan {
    inner: OfferPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::Io { .. } => CcStatus::Io,
        Error::Schema { .. } | Error::Csv(_) => CcStatus::Schema,
        Error::InvalidInstance(_) | Error::CapViolation { .. } | Error::NegativeWeight { .. } => {
            CcStatus::InvalidInstance
        }
        Error::InvalidPlan(_) => CcStatus::InvalidPlan,
        Error::Config(_) => CcStatus::InvalidArgument,
        _ => CcStatus::Solver,
    }
}

struct Fail(CcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CcStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            CcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn solver_config(epsilon_floor: f64) -> Result<SolverConfig, Fail> {
    if !(epsilon_floor > 0.0) {
        return Err(Fail(
            CcStatus::InvalidArgument,
            format!("epsilon_floor must be > 0, got {epsilon_floor}"),
        ));
    }
    Ok(SolverConfig { epsilon_floor })
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads an instance JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_load(path: *const c_char, out: *mut *mut CcInstance) -> CcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = load_instance(path)?;
        inner.check()?;
        put(out, Box::into_raw(Box::new(CcInstance { inner })), "out")
    })
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_from_json(json: *const c_char, out: *mut *mut CcInstance) -> CcStatus {
    guard(|| {
        let inner = instance_from_json(str_arg(json, "json")?)?;
        inner.check()?;
        put(out, Box::into_raw(Box::new(CcInstance { inner })), "out")
    })
}

/// Generates a random instance. Logistic instances calibrate on
/// `fit_points` simulated decisions.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_generate(
    n_tasks: usize,
    n_drivers: usize,
    rho: f64,
    mu: f64,
    seed: u64,
    model: CcModel,
    fit_points: usize,
    out: *mut *mut CcInstance,
) -> CcStatus {
    guard(|| {
        let cfg = GenConfig {
            n_tasks,
            n_drivers,
            rho,
            mu,
            seed,
            model: match model {
                CcModel::Linear => ModelKind::Linear,
                CcModel::Logistic => ModelKind::Logistic,
            },
            fit_points,
            ..Default::default()
        };
        let inner = generate(&cfg)?;
        put(out, Box::into_raw(Box::new(CcInstance { inner })), "out")
    })
}

/// # Safety
/// `inst` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_free(inst: *mut CcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_size(
    inst: *const CcInstance,
    n_tasks: *mut usize,
    n_drivers: *mut usize,
) -> CcStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        put(n_tasks, inst.n_tasks(), "n_tasks")?;
        put(n_drivers, inst.n_drivers(), "n_drivers")
    })
}

/// Serializes an instance; release the string with [`cc_string_free`].
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_instance_to_json(inst: *const CcInstance, out: *mut *mut c_char) -> CcStatus {
    guard(|| {
        let text = instance_to_json(&handle(inst, "inst")?.inner)?;
        put(out, owned_string(text), "out")
    })
}

/// Optimal individual compensations and assignment.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_solve_two_phase(
    inst: *const CcInstance,
    epsilon_floor: f64,
    out: *mut *mut CcPlan,
) -> CcStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        let inner = solve_two_phase(inst, &solver_config(epsilon_floor)?)?;
        put(out, Box::into_raw(Box::new(CcPlan { inner })), "out")
    })
}

/// Plan under a compensation scheme. Benchmark rates are tuned and written
/// to `p_out` when it is not null; the individual scheme writes NaN.
///
/// # Safety
/// `inst` must be a live handle, `out` a valid pointer, `p_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn cc_solve_scheme(
    inst: *const CcInstance,
    scheme: CcScheme,
    epsilon_floor: f64,
    out: *mut *mut CcPlan,
    p_out: *mut f64,
) -> CcStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        let kind = match scheme {
            CcScheme::Individual => SchemeKind::Individual,
            CcScheme::Detour => SchemeKind::Detour,
            CcScheme::Distance => SchemeKind::Distance,
            CcScheme::Flat => SchemeKind::Flat,
        };
        let (inner, p) = plan_for_scheme(kind, inst, &solver_config(epsilon_floor)?)?;
        if !p_out.is_null() {
            p_out.write(p.unwrap_or(f64::NAN));
        }
        put(out, Box::into_raw(Box::new(CcPlan { inner })), "out")
    })
}

/// Piecewise-linear model with side constraints given as a JSON array
/// (null for none). Returns `Infeasible` when no plan satisfies them and
/// `Solver` when the node limit is hit before any plan is found.
///
/// # Safety
/// `inst` must be a live handle, `constraints_json` null or a NUL-terminated
/// string, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_solve_nonsep(
    inst: *const CcInstance,
    constraints_json: *const c_char,
    breakpoints: usize,
    node_limit: usize,
    epsilon_floor: f64,
    out: *mut *mut CcPlan,
) -> CcStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.inner;
        let constraints = if constraints_json.is_null() {
            Vec::new()
        } else {
            constraints_from_json(str_arg(constraints_json, "constraints_json")?)?
        };
        let opts = NonSepOptions {
            breakpoints,
            node_limit,
            epsilon_floor: solver_config(epsilon_floor)?.epsilon_floor,
            ..Default::default()
        };
        let res = solve_nonsep(inst, &constraints, &opts)?;
        match (res.status, res.plan) {
            (MilpStatus::Infeasible, _) => Err(Fail(CcStatus::Infeasible, "model is infeasible".into())),
            (_, None) => Err(Fail(CcStatus::Solver, "node limit reached without a plan".into())),
            (_, Some(inner)) => put(out, Box::into_raw(Box::new(CcPlan { inner })), "out"),
        }
    })
}

/// # Safety
/// `plan` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cc_plan_free(plan: *mut CcPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_plan_summary(
    plan: *const CcPlan,
    expected_cost: *mut f64,
    expected_distance: *mut f64,
    n_offers: *mut usize,
) -> CcStatus {
    guard(|| {
        let plan = &handle(plan, "plan")?.inner;
        put(expected_cost, plan.expected_cost, "expected_cost")?;
        put(expected_distance, plan.expected_distance, "expected_distance")?;
        put(n_offers, plan.n_offers(), "n_offers")
    })
}

/// Allocation of `task`: driver index and compensation, or driver -1 and
/// compensation 0 for the company.
///
/// # Safety
/// `plan` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_plan_allocation(
    plan: *const CcPlan,
    task: usize,
    driver: *mut i64,
    compensation: *mut f64,
) -> CcStatus {
    guard(|| {
        let plan = &handle(plan, "plan")?.inner;
        let a = plan.allocations.get(task).ok_or_else(|| {
            Fail(
                CcStatus::InvalidArgument,
                format!("task {task} out of range ({} tasks)", plan.allocations.len()),
            )
        })?;
        let (d, c) = match *a {
            Allocation::Company => (-1, 0.0),
            Allocation::Offer { driver, compensation } => (driver as i64, compensation),
        };
        put(driver, d, "driver")?;
        put(compensation, c, "compensation")
    })
}

/// Serializes a plan; release the string with [`cc_string_free`].
///
/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_plan_to_json(plan: *const CcPlan, out: *mut *mut c_char) -> CcStatus {
    guard(|| {
        let text = plan_to_json(&handle(plan, "plan")?.inner)?;
        put(out, owned_string(text), "out")
    })
}

/// Optimal compensation and weight of one pair under linear acceptance.
///
/// # Safety
/// Out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_optimal_compensation_linear(
    alpha: f64,
    beta: f64,
    c_prime: f64,
    cap: f64,
    epsilon_floor: f64,
    c_star: *mut f64,
    w_star: *mut f64,
) -> CcStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&alpha) || !(beta > 0.0) || !(c_prime >= 0.0) || !(cap >= 0.0) {
            return Err(Fail(
                CcStatus::InvalidArgument,
                format!("invalid linear parameters alpha={alpha} beta={beta} c'={c_prime} cap={cap}"),
            ));
        }
        let r = optimal_compensation_linear(alpha, beta, c_prime, cap, solver_config(epsilon_floor)?.epsilon_floor);
        put(c_star, r.c_star, "c_star")?;
        put(w_star, r.w_star, "w_star")
    })
}

/// Principal branch of the Lambert W function for `x >= 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_lambert_w0(x: f64, out: *mut f64) -> CcStatus {
    guard(|| put(out, lambert_w0(x)?, "out"))
}
