//! C ABI for the cc-tunnel solver.
//!
//! All objects are opaque handles created and destroyed by this library.
//! Every fallible call returns a [`CcStatus`]; on failure a description is
//! available from [`cc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cc_tunnel::model::{channel_energy, Convention, ModelParams, Spin};
use cc_tunnel::odeint::IntegratorConfig;
use cc_tunnel::oracle::{transfer_matrix_solve, Segmentation, DEFAULT_SEGMENTS};
use cc_tunnel::sweep::{run_sweep, SweepPlan, SweepResult};
use cc_tunnel::vra::{solve_amplitudes, ScatteringRecord};
use cc_tunnel::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NoOpenChannel = 3,
    IntegrationFailed = 4,
    OutOfRange = 5,
    PointFailed = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcConvention {
    PaperCode = 0,
    Derived = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcSpin {
    Up = 0,
    Down = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcSolver {
    /// Variable reflection amplitudes (the main solver).
    Vra = 0,
    /// Piecewise-constant transfer matrices (the cross-check).
    TransferMatrix = 1,
}

/// Model parameters plus integrator settings.
pub struct CcProblem {
    params: ModelParams,
    integrator: IntegratorConfig,
    segments: usize,
}

/// Probabilities at one energy.
pub struct CcRecord {
    record: ScatteringRecord,
}

/// An energy sweep.
pub struct CcSweep {
    result: SweepResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> CcStatus {
    match err {
        Error::InvalidParameter { .. } | Error::LimitsOutsideWell { .. } | Error::LarmorDomain(_) => {
            CcStatus::InvalidParameter
        }
        Error::NoOpenChannel { .. } => CcStatus::NoOpenChannel,
        Error::StepSizeUnderflow { .. } | Error::MaxEvalsExceeded { .. } | Error::NonFinite { .. } | Error::Singular { .. } => {
            CcStatus::IntegrationFailed
        }
    }
}

fn fail(status: CcStatus, msg: impl Into<String>) -> CcStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> CcStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `f`, turning a panic into [`CcStatus::Panic`].
fn guard(f: impl FnOnce() -> CcStatus) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CcStatus::Panic, "internal panic"),
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, CcStatus> {
    p.as_ref().ok_or_else(|| fail(CcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CcStatus> {
    p.as_mut().ok_or_else(|| fail(CcStatus::NullPointer, format!("{what} is null")))
}

fn spin(s: CcSpin) -> Spin {
    match s {
        CcSpin::Up => Spin::Up,
        CcSpin::Down => Spin::Down,
    }
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cc_status_name(status: CcStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CcStatus::Ok => c"ok",
        CcStatus::NullPointer => c"null pointer",
        CcStatus::InvalidParameter => c"invalid parameter",
        CcStatus::NoOpenChannel => c"no open channel",
        CcStatus::IntegrationFailed => c"integration failed",
        CcStatus::OutOfRange => c"index out of range",
        CcStatus::PointFailed => c"grid point failed",
        CcStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// New problem with the default parameters (a = b = 1, d = l = 5, u = 0,
/// V0 = m = hbar = 1, n_max = 7, paper-code convention). Free with
/// [`cc_problem_free`].
#[no_mangle]
pub extern "C" fn cc_problem_new() -> *mut CcProblem {
    Box::into_raw(Box::new(CcProblem {
        params: ModelParams::default(),
        integrator: IntegratorConfig::default(),
        segments: DEFAULT_SEGMENTS,
    }))
}

/// # Safety
/// `problem` must come from [`cc_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_free(problem: *mut CcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Applies `edit` to a copy and keeps it only if it validates.
unsafe fn edit_params(problem: *mut CcProblem, edit: impl FnOnce(&mut ModelParams)) -> CcStatus {
    guard(|| {
        let p = try_status!(borrow_mut(problem, "problem"));
        let mut next = p.params.clone();
        edit(&mut next);
        match next.validate() {
            Ok(()) => {
                p.params = next;
                CcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Barrier width `a`, field half-width `b`, well width `d`, separation `l`.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_geometry(problem: *mut CcProblem, a: f64, b: f64, d: f64, l: f64) -> CcStatus {
    edit_params(problem, |p| {
        p.a = a;
        p.b = b;
        p.d = d;
        p.l = l;
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_field(problem: *mut CcProblem, u: f64) -> CcStatus {
    edit_params(problem, |p| p.u = u)
}

/// Barrier height, particle mass and hbar.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_scales(problem: *mut CcProblem, v0: f64, mass: f64, hbar: f64) -> CcStatus {
    edit_params(problem, |p| {
        p.v0 = v0;
        p.m = mass;
        p.hbar = hbar;
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_n_max(problem: *mut CcProblem, n_max: usize) -> CcStatus {
    edit_params(problem, |p| p.n_max = n_max)
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_convention(problem: *mut CcProblem, convention: CcConvention) -> CcStatus {
    edit_params(problem, |p| {
        p.convention = match convention {
            CcConvention::PaperCode => Convention::PaperCode,
            CcConvention::Derived => Convention::Derived,
        }
    })
}

/// Integrator tolerances and step cap; `segments` is used by the
/// transfer-matrix solver.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_problem_set_numerics(
    problem: *mut CcProblem,
    rtol: f64,
    atol: f64,
    max_step: f64,
    segments: usize,
) -> CcStatus {
    guard(|| {
        let p = try_status!(borrow_mut(problem, "problem"));
        let cfg = IntegratorConfig { rtol, atol, max_step, ..p.integrator.clone() };
        if let Err(e) = cfg.validate() {
            return from_error(e);
        }
        if segments == 0 {
            return fail(CcStatus::InvalidParameter, "segments must be at least 1");
        }
        p.integrator = cfg;
        p.segments = segments;
        CcStatus::Ok
    })
}

/// Energy `ε_j` of internal mode `j` (1-based).
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_channel_energy(problem: *const CcProblem, j: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let p = try_status!(borrow(problem, "problem"));
        let out = try_status!(borrow_mut(out, "out"));
        if j == 0 {
            return fail(CcStatus::OutOfRange, "channels are 1-based");
        }
        *out = channel_energy(&p.params, j);
        CcStatus::Ok
    })
}

/// Solves at total energy `energy`; on success `*out` owns a record to be
/// released with [`cc_record_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_solve(
    problem: *const CcProblem,
    energy: f64,
    solver: CcSolver,
    out: *mut *mut CcRecord,
) -> CcStatus {
    guard(|| {
        let p = try_status!(borrow(problem, "problem"));
        let out = try_status!(borrow_mut(out, "out"));
        *out = ptr::null_mut();
        let rec = match solver {
            CcSolver::Vra => solve_amplitudes(energy, &p.params, &p.integrator),
            CcSolver::TransferMatrix => {
                transfer_matrix_solve(energy, &p.params, &Segmentation::for_params(&p.params, p.segments))
            }
        };
        match rec {
            Ok(record) => {
                *out = Box::into_raw(Box::new(CcRecord { record }));
                CcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `record` must come from [`cc_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_record_free(record: *mut CcRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Number of open internal modes; 0 for a null handle.
///
/// # Safety
/// `record` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_record_open_channels(record: *const CcRecord) -> usize {
    record.as_ref().map_or(0, |r| r.record.channels.n_open())
}

/// Largest `|1 - Σ(P_r + P_t)|` over incident states; NaN for a null handle.
///
/// # Safety
/// `record` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_record_unitarity_defect(record: *const CcRecord) -> f64 {
    record.as_ref().map_or(f64::NAN, |r| r.record.unitarity_defect)
}

unsafe fn record_probability(
    record: *const CcRecord,
    from: (usize, CcSpin),
    to: (usize, CcSpin),
    out: *mut f64,
    transmitted: bool,
) -> CcStatus {
    guard(|| {
        let r = try_status!(borrow(record, "record"));
        let out = try_status!(borrow_mut(out, "out"));
        let n = r.record.channels.n_open();
        if from.0 == 0 || to.0 == 0 || from.0 > n || to.0 > n {
            return fail(CcStatus::OutOfRange, format!("channels must lie in 1..={n}"));
        }
        let (f, t) = ((from.0, spin(from.1)), (to.0, spin(to.1)));
        *out = if transmitted { r.record.transmission(f, t) } else { r.record.reflection(f, t) };
        CcStatus::Ok
    })
}

/// Transmission probability from (channel, spin) to (channel, spin).
///
/// # Safety
/// `record` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_record_transmission(
    record: *const CcRecord,
    from_channel: usize,
    from_spin: CcSpin,
    to_channel: usize,
    to_spin: CcSpin,
    out: *mut f64,
) -> CcStatus {
    record_probability(record, (from_channel, from_spin), (to_channel, to_spin), out, true)
}

/// Reflection probability from (channel, spin) to (channel, spin).
///
/// # Safety
/// `record` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_record_reflection(
    record: *const CcRecord,
    from_channel: usize,
    from_spin: CcSpin,
    to_channel: usize,
    to_spin: CcSpin,
    out: *mut f64,
) -> CcStatus {
    record_probability(record, (from_channel, from_spin), (to_channel, to_spin), out, false)
}

/// Energy sweep at `(E - ε1)/V0 = start + i * span / points`, `i = 1..=points`,
/// from the given incident state. `threads = 0` lets the pool choose.
/// Individual points may fail without failing the sweep.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_energy(
    problem: *const CcProblem,
    start: f64,
    span: f64,
    points: usize,
    incident_channel: usize,
    incident_spin: CcSpin,
    threads: usize,
    out: *mut *mut CcSweep,
) -> CcStatus {
    guard(|| {
        let p = try_status!(borrow(problem, "problem"));
        let out = try_status!(borrow_mut(out, "out"));
        *out = ptr::null_mut();
        let plan = SweepPlan {
            start,
            incident_channel,
            incident_spin: spin(incident_spin),
            segments: p.segments,
            threads: (threads > 0).then_some(threads),
            ..SweepPlan::energy_sweep(p.params.clone(), span, points)
        };
        match run_sweep(&plan, &p.integrator) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(CcSweep { result }));
                CcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `sweep` must come from [`cc_sweep_energy`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_free(sweep: *mut CcSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_len(sweep: *const CcSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.result.points.len())
}

/// Grid value `(E - ε1)/V0` of point `index` (0-based).
///
/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_abscissa(sweep: *const CcSweep, index: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let s = try_status!(borrow(sweep, "sweep"));
        let out = try_status!(borrow_mut(out, "out"));
        match s.result.points.get(index) {
            Some(p) => {
                *out = p.abscissa;
                CcStatus::Ok
            }
            None => fail(CcStatus::OutOfRange, format!("index {index} beyond {} points", s.result.points.len())),
        }
    })
}

/// Transmission at point `index` into `channel` with the incident spin kept
/// (`flip = 0`) or flipped; `channel = 0` gives the total. Returns
/// [`CcStatus::PointFailed`] for a gap in the sweep and
/// [`CcStatus::OutOfRange`] for a channel closed at that point.
///
/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_transmission(
    sweep: *const CcSweep,
    index: usize,
    channel: usize,
    flip: bool,
    out: *mut f64,
) -> CcStatus {
    guard(|| {
        let s = try_status!(borrow(sweep, "sweep"));
        let out = try_status!(borrow_mut(out, "out"));
        let Some(point) = s.result.points.get(index) else {
            return fail(CcStatus::OutOfRange, format!("index {index} beyond {} points", s.result.points.len()));
        };
        let summary = match &point.summary {
            Ok(sm) => sm,
            Err(msg) => return fail(CcStatus::PointFailed, msg.clone()),
        };
        if channel == 0 {
            *out = summary.total_transmission;
            return CcStatus::Ok;
        }
        let column = if flip { &summary.flip } else { &summary.same };
        match column.get(channel - 1) {
            Some(&v) => {
                *out = v;
                CcStatus::Ok
            }
            None => fail(CcStatus::OutOfRange, format!("channel {channel} is closed at point {index}")),
        }
    })
}

/// Unitarity defect at point `index`.
///
/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep_unitarity_defect(sweep: *const CcSweep, index: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let s = try_status!(borrow(sweep, "sweep"));
        let out = try_status!(borrow_mut(out, "out"));
        match s.result.points.get(index).map(|p| &p.summary) {
            Some(Ok(sm)) => {
                *out = sm.unitarity_defect;
                CcStatus::Ok
            }
            Some(Err(msg)) => fail(CcStatus::PointFailed, msg.clone()),
            None => fail(CcStatus::OutOfRange, format!("index {index} beyond {} points", s.result.points.len())),
        }
    })
}
