//! C ABI for the lakesim library.
//!
//! A `LakeSim` handle owns a parsed scenario and, after `lakesim_run`, its
//! trajectory. Every call returns a `LakeStatus`; on failure the message is
//! available from `lakesim_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lakesim::cli::{load_config, parse_config, LoadedConfig};
use lakesim::solver::{discrete_gronwall_bound, run_simulation, Trajectory};
use lakesim::LakeError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    Solver = 5,
    /// The run stopped early; the states computed so far are kept.
    Incomplete = 6,
    NotRun = 7,
    OutOfRange = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

/// Field selector for `lakesim_copy_field`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LakeField {
    Omega = 0,
    Stream = 1,
    Flux = 2,
}

/// Opaque simulation handle.
pub struct LakeSim {
    config: LoadedConfig,
    trajectory: Option<Trajectory>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(e: &LakeError) -> LakeStatus {
    match e {
        LakeError::Config { .. } => LakeStatus::Config,
        LakeError::UnsupportedShape(_) | LakeError::ResolutionTooCoarse { .. } | LakeError::NonPositiveDepth { .. } => {
            LakeStatus::Domain
        }
        LakeError::InvalidArgument(_) => LakeStatus::InvalidArgument,
        LakeError::Io(_) | LakeError::Csv(_) | LakeError::Json(_) | LakeError::Format(_) => LakeStatus::Io,
        _ => LakeStatus::Solver,
    }
}

fn fail(status: LakeStatus, message: impl Into<String>) -> LakeStatus {
    set_error(message);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), LakeStatus>) -> LakeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LakeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(LakeStatus::Panic, "internal panic"),
    }
}

fn lake(e: LakeError) -> LakeStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, LakeStatus> {
    if s.is_null() {
        return Err(fail(LakeStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(LakeStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn handle<'a>(sim: *const LakeSim) -> Result<&'a LakeSim, LakeStatus> {
    sim.as_ref().ok_or_else(|| fail(LakeStatus::NullPointer, "null handle"))
}

unsafe fn output<'a, T>(out: *mut T) -> Result<&'a mut T, LakeStatus> {
    out.as_mut().ok_or_else(|| fail(LakeStatus::NullPointer, "null output pointer"))
}

fn trajectory(sim: &LakeSim) -> Result<&Trajectory, LakeStatus> {
    sim.trajectory.as_ref().ok_or_else(|| fail(LakeStatus::NotRun, "no run yet"))
}

fn boxed(config: LoadedConfig, out: &mut *mut LakeSim) {
    *out = Box::into_raw(Box::new(LakeSim { config, trajectory: None }));
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lakesim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a scenario given as TOML text. Relative table paths resolve against
/// the working directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_from_toml(toml: *const c_char, out: *mut *mut LakeSim) -> LakeStatus {
    guard(|| {
        let out = output(out)?;
        *out = ptr::null_mut();
        let config = parse_config(text(toml)?, Path::new(".")).map_err(lake)?;
        boxed(config, out);
        Ok(())
    })
}

/// Reads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_from_file(path: *const c_char, out: *mut *mut LakeSim) -> LakeStatus {
    guard(|| {
        let out = output(out)?;
        *out = ptr::null_mut();
        let (config, _) = load_config(Path::new(text(path)?)).map_err(lake)?;
        boxed(config, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from `lakesim_from_toml` or `lakesim_from_file` and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lakesim_free(sim: *mut LakeSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of active cells.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_cell_count(sim: *const LakeSim, out: *mut usize) -> LakeStatus {
    guard(|| {
        *output(out)? = handle(sim)?.config.domain.len();
        Ok(())
    })
}

/// Writes the cell centers as x₀, y₀, x₁, y₁, ... into `xy`, which holds `len`
/// doubles.
///
/// # Safety
/// `xy` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lakesim_cell_centers(sim: *const LakeSim, xy: *mut f64, len: usize) -> LakeStatus {
    guard(|| {
        let centers = &handle(sim)?.config.domain.grid.centers;
        let dst = buffer(xy, len, 2 * centers.len())?;
        for (d, c) in dst.chunks_exact_mut(2).zip(centers) {
            d.copy_from_slice(c);
        }
        Ok(())
    })
}

unsafe fn buffer<'a>(ptr: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], LakeStatus> {
    if ptr.is_null() {
        return Err(fail(LakeStatus::NullPointer, "null buffer"));
    }
    if len < needed {
        return Err(fail(LakeStatus::BufferTooSmall, format!("buffer holds {len} values, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, needed))
}

/// Runs the simulation, replacing any earlier trajectory. Returns `Incomplete`
/// when a step failed; the states before the failure remain readable.
///
/// # Safety
/// `sim` must be a live handle not shared with another thread.
#[no_mangle]
pub unsafe extern "C" fn lakesim_run(sim: *mut LakeSim) -> LakeStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| fail(LakeStatus::NullPointer, "null handle"))?;
        let c = &sim.config;
        let traj = run_simulation(&c.domain, &c.scenario, &c.solver).map_err(lake)?;
        let failure = traj.failure.as_ref().map(|e| e.to_string());
        sim.trajectory = Some(traj);
        match failure {
            Some(message) => Err(fail(LakeStatus::Incomplete, message)),
            None => Ok(()),
        }
    })
}

/// Number of stored states of the last run.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_state_count(sim: *const LakeSim, out: *mut usize) -> LakeStatus {
    guard(|| {
        *output(out)? = trajectory(handle(sim)?)?.states.len();
        Ok(())
    })
}

/// Time of state `index`.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_state_time(sim: *const LakeSim, index: usize, out: *mut f64) -> LakeStatus {
    guard(|| {
        let traj = trajectory(handle(sim)?)?;
        let state = traj.states.get(index).ok_or_else(|| fail(LakeStatus::OutOfRange, "state index out of range"))?;
        *output(out)? = state.t;
        Ok(())
    })
}

/// Copies one cell field of state `index` into `values`, which holds `len`
/// doubles; at least the cell count is needed.
///
/// # Safety
/// `values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lakesim_copy_field(
    sim: *const LakeSim,
    index: usize,
    field: LakeField,
    values: *mut f64,
    len: usize,
) -> LakeStatus {
    guard(|| {
        let traj = trajectory(handle(sim)?)?;
        let state = traj.states.get(index).ok_or_else(|| fail(LakeStatus::OutOfRange, "state index out of range"))?;
        let src = match field {
            LakeField::Omega => &state.omega,
            LakeField::Stream => &state.stream,
            LakeField::Flux => &state.flux,
        };
        buffer(values, len, src.len())?.copy_from_slice(src);
        Ok(())
    })
}

/// Largest |ω| over all stored states of the last run.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lakesim_sup_omega(sim: *const LakeSim, out: *mut f64) -> LakeStatus {
    guard(|| {
        *output(out)? = trajectory(handle(sim)?)?.sup_omega();
        Ok(())
    })
}

/// The Gronwall bound 2e^{∫D}[y₀ + ∫B e^{−∫D}] at each of `n` sample times.
///
/// # Safety
/// `times`, `d` and `b` must point to `n` readable doubles, `out` to `n`
/// writable ones.
#[no_mangle]
pub unsafe extern "C" fn lakesim_gronwall_bound(
    y0: f64,
    times: *const f64,
    d: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> LakeStatus {
    guard(|| {
        if times.is_null() || d.is_null() || b.is_null() {
            return Err(fail(LakeStatus::NullPointer, "null input series"));
        }
        let read = |p: *const f64| std::slice::from_raw_parts(p, n);
        let bound = discrete_gronwall_bound(y0, read(times), read(d), read(b)).map_err(lake)?;
        buffer(out, n, n)?.copy_from_slice(&bound);
        Ok(())
    })
}
