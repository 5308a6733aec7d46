//! C interface: opaque operator and simulation handles, integer status
//! codes and a per-thread last-error message.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sbp_mhd::benchmarks::SchemeSpec;
use sbp_mhd::driver::{parse_config_text, prepare, RunConfig};
use sbp_mhd::sbp_ops::{verify_sbp, OperatorKind, SbpOperator1D};
use sbp_mhd::solver::Solver;
use sbp_mhd::verification::equivalence_deviation;
use sbp_mhd::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbpOperatorKind {
    Lgl = 0,
    FdSbp = 1,
}

/// Latest diagnostics sample of a simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SbpDiagnostics {
    pub t: f64,
    pub mean_alpha: f64,
    pub total_entropy: f64,
    pub min_rho: f64,
    pub min_p: f64,
}

/// One-dimensional SBP operator.
pub struct SbpOperator {
    inner: SbpOperator1D,
}

/// Benchmark run in progress.
pub struct SbpSimulation {
    solver: Solver,
    dt: f64,
    t_end: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> SbpStatus {
    match e {
        Error::Config(_)
        | Error::InvalidOperator(_)
        | Error::Unsupported(_)
        | Error::Unavailable(_) => SbpStatus::Config,
        Error::Io { .. } => SbpStatus::Io,
        Error::AlphaOutOfRange { .. } | Error::EmptyWindow => SbpStatus::InvalidArgument,
        _ => SbpStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SbpStatus, String)>) -> SbpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SbpStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside the library");
            SbpStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SbpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SbpStatus, String) {
    (SbpStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn sbp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sbp_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr() as *const c_char
}

/// Builds an operator. `n` is the polynomial degree for LGL and the node
/// count for FD-SBP.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_new(
    kind: SbpOperatorKind,
    n: usize,
    out: *mut *mut SbpOperator,
) -> SbpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            SbpOperatorKind::Lgl => OperatorKind::Lgl,
            SbpOperatorKind::FdSbp => OperatorKind::FdSbp,
        };
        let inner = SchemeSpec { kind, size: n }.build().map_err(lib)?;
        *out = Box::into_raw(Box::new(SbpOperator { inner }));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from [`sbp_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_free(op: *mut SbpOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of nodes, 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_num_nodes(op: *const SbpOperator) -> usize {
    op.as_ref().map_or(0, |o| o.inner.n_nodes())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), (SbpStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < src.len() {
        return Err((
            SbpStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Copies the nodes on [-1, 1] into `out` (at least `num_nodes` entries).
///
/// # Safety
/// `op` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_nodes(
    op: *const SbpOperator,
    out: *mut f64,
    len: usize,
) -> SbpStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        copy_out(&op.inner.nodes, out, len)
    })
}

/// Copies the diagonal norm weights.
///
/// # Safety
/// `op` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_weights(
    op: *const SbpOperator,
    out: *mut f64,
    len: usize,
) -> SbpStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        copy_out(&op.inner.weights, out, len)
    })
}

/// Checks the summation-by-parts identities at tolerance `tol` and stores
/// the verdict in `passes`.
///
/// # Safety
/// `op` must be a live handle and `passes` writable.
#[no_mangle]
pub unsafe extern "C" fn sbp_operator_check(
    op: *const SbpOperator,
    tol: f64,
    passes: *mut bool,
) -> SbpStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        if passes.is_null() {
            return Err(null("passes"));
        }
        if tol.is_nan() || tol < 0.0 {
            return Err((
                SbpStatus::InvalidArgument,
                format!("tolerance {tol} is negative"),
            ));
        }
        *passes = verify_sbp(&op.inner).passes(tol);
        Ok(())
    })
}

/// Largest scaled difference between the direct and flux-differencing
/// right-hand sides over `fields` random fields.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbp_equivalence_deviation(
    op: *const SbpOperator,
    elements: usize,
    fields: usize,
    seed: u64,
    out: *mut f64,
) -> SbpStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if elements == 0 || fields == 0 {
            return Err((
                SbpStatus::InvalidArgument,
                "elements and fields must be positive".into(),
            ));
        }
        *out = equivalence_deviation(&op.inner, elements, fields, seed).map_err(lib)?;
        Ok(())
    })
}

/// Sets up a run from `key=value` lines in the config-file format
/// (`problem=orszag_tang`, `dof=64`, ...). Output settings are ignored.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_new(
    config: *const c_char,
    out: *mut *mut SbpSimulation,
) -> SbpStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config).to_str().map_err(|_| {
            (
                SbpStatus::InvalidArgument,
                "config is not UTF-8".to_string(),
            )
        })?;
        let cfg = RunConfig::from_settings(&parse_config_text(text).map_err(lib)?).map_err(lib)?;
        let run = prepare(&cfg).map_err(lib)?;
        let mut solver = run.solver;
        let row = solver.sample().map_err(lib)?;
        solver.diagnostics.push(row).map_err(lib)?;
        *out = Box::into_raw(Box::new(SbpSimulation {
            solver,
            dt: run.dt,
            t_end: run.t_end,
        }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from [`sbp_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_free(sim: *mut SbpSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes `steps` full time steps.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_step(sim: *mut SbpSimulation, steps: usize) -> SbpStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..steps {
            sim.solver.step(sim.dt).map_err(lib)?;
        }
        Ok(())
    })
}

/// Advances to time `t` (the configured end time when `t` is negative),
/// recording diagnostics samples on the way.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_advance_to(sim: *mut SbpSimulation, t: f64) -> SbpStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        let target = if t < 0.0 { sim.t_end } else { t };
        if !target.is_finite() {
            return Err((
                SbpStatus::InvalidArgument,
                format!("target time {t} is not finite"),
            ));
        }
        sim.solver.advance_to(target, sim.dt).map_err(lib)
    })
}

/// Current simulation time, NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_time(sim: *const SbpSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.solver.time)
}

/// Time step in use, NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_dt(sim: *const SbpSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.dt)
}

/// Total number of nodes, 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_num_nodes(sim: *const SbpSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.solver.field.data.len())
}

/// Copies the conserved variables, nine per node in element-major order,
/// into `out` (at least `9 * num_nodes` entries).
///
/// # Safety
/// `sim` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_state(
    sim: *const SbpSimulation,
    out: *mut f64,
    len: usize,
) -> SbpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let flat: Vec<f64> = sim.solver.field.data.iter().flat_map(|u| u.0).collect();
        copy_out(&flat, out, len)
    })
}

/// Total mass of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_mass(
    sim: *const SbpSimulation,
    out: *mut f64,
) -> SbpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = sim.solver.total_mass();
        Ok(())
    })
}

/// Most recent diagnostics sample.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbp_simulation_diagnostics(
    sim: *const SbpSimulation,
    out: *mut SbpDiagnostics,
) -> SbpStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = sim
            .solver
            .diagnostics
            .rows
            .last()
            .ok_or_else(|| (SbpStatus::Numerical, "no diagnostics recorded".to_string()))?;
        *out = SbpDiagnostics {
            t: r.t,
            mean_alpha: r.mean_alpha,
            total_entropy: r.total_entropy,
            min_rho: r.min_rho,
            min_p: r.min_p,
        };
        Ok(())
    })
}
