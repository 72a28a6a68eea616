//! C interface to the `expdg` solvers.
//!
//! Every function returns an [`ExpdgStatus`] code; on failure a message is kept
//! per thread and can be read with [`expdg_last_error_message`]. Simulations are
//! opaque handles created by `expdg_simulation_from_*` and released with
//! [`expdg_simulation_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use expdg::config::{preset, ScenarioConfig};
use expdg::dg_core::{assemble_advection_matrix, DgSpace, FluxKind};
use expdg::simulation::Simulation;
use expdg::Error;

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpdgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid configuration, preset name or argument.
    Config = 2,
    /// The solver hit a numerical safeguard (non-finite state, failed factorisation).
    Numerical = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
    /// The caller's buffer is too small; the required length was written back.
    Buffer = 5,
    /// An internal panic was caught.
    Panic = 6,
}

/// Interface flux for [`expdg_advection_matrix`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpdgFlux {
    Central = 0,
    Upwind = 1,
}

/// Diagnostics of the current state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpdgDiagnostics {
    pub time: f64,
    pub steps: usize,
    pub electric_energy: f64,
    pub magnetic_energy: f64,
    pub kinetic_energy: f64,
    pub total_energy: f64,
    pub mass: f64,
    pub poisson_residual: f64,
    pub e1_l2: f64,
    pub e2_l2: f64,
    pub b_l2: f64,
}

/// Opaque simulation handle.
pub struct ExpdgSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

struct Fail(ExpdgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => ExpdgStatus::Numerical,
            _ => ExpdgStatus::Config,
        };
        Fail(code, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ExpdgStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ExpdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExpdgStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            ExpdgStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(ExpdgStatus::Utf8, format!("{what}: {e}")))
}

fn boxed(cfg: &ScenarioConfig, out: *mut *mut ExpdgSimulation) -> Result<(), Fail> {
    let sim = Simulation::from_config(cfg)?;
    // SAFETY: checked non-null by the callers.
    unsafe { *out = Box::into_raw(Box::new(ExpdgSimulation { sim })) };
    Ok(())
}

/// Creates a simulation from a built-in preset such as `"landau"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_from_preset(
    name: *const c_char,
    out: *mut *mut ExpdgSimulation,
) -> ExpdgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = preset(read_str(name, "name")?)?;
        boxed(&cfg, out)
    })
}

/// Creates a simulation from the text of a TOML scenario file.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_from_toml(
    toml: *const c_char,
    out: *mut *mut ExpdgSimulation,
) -> ExpdgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = ScenarioConfig::from_toml(read_str(toml, "toml")?)?;
        boxed(&cfg, out)
    })
}

/// Advances the simulation by `steps` time steps.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_step(
    sim: *mut ExpdgSimulation,
    steps: usize,
) -> ExpdgStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..steps {
            s.sim.step()?;
        }
        Ok(())
    })
}

/// Writes the current simulation time.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_time(
    sim: *const ExpdgSimulation,
    out: *mut f64,
) -> ExpdgStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.sim.time();
        Ok(())
    })
}

/// Writes the diagnostics of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_diagnostics(
    sim: *const ExpdgSimulation,
    out: *mut ExpdgDiagnostics,
) -> ExpdgStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o = s.sim.observables();
        *out = ExpdgDiagnostics {
            time: s.sim.time(),
            steps: s.sim.steps(),
            electric_energy: o.electric_energy,
            magnetic_energy: o.magnetic_energy,
            kinetic_energy: o.kinetic_energy,
            total_energy: o.total_energy,
            mass: o.mass,
            poisson_residual: o.poisson_residual,
            e1_l2: o.e1_l2,
            e2_l2: o.e2_l2,
            b_l2: o.b_l2,
        };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn expdg_simulation_free(sim: *mut ExpdgSimulation) {
    if !sim.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(sim))));
    }
}

/// Writes the DG advection matrix (approximating `-d/dx`) for `cells` cells of
/// degree `degree` on `[0, length)` in row-major order.
///
/// `len` is the capacity of `buf` in doubles; `dim` receives the matrix size.
/// If `buf` is null or too small, `Buffer` is returned after writing `dim`.
///
/// # Safety
/// `buf` must be null or valid for `len` writes; `dim` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expdg_advection_matrix(
    cells: usize,
    degree: usize,
    length: f64,
    flux: ExpdgFlux,
    buf: *mut f64,
    len: usize,
    dim: *mut usize,
) -> ExpdgStatus {
    guard(|| {
        let dim = dim.as_mut().ok_or_else(|| null("dim"))?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Fail(
                ExpdgStatus::Config,
                format!("length must be positive, got {length}"),
            ));
        }
        let space = DgSpace::new(cells, degree, 0.0, length)?;
        let n = space.ndof();
        *dim = n;
        if buf.is_null() || len < n * n {
            return Err(Fail(
                ExpdgStatus::Buffer,
                format!("matrix needs {} doubles, buffer holds {len}", n * n),
            ));
        }
        let flux = match flux {
            ExpdgFlux::Central => FluxKind::Central,
            ExpdgFlux::Upwind => FluxKind::Upwind,
        };
        let a = assemble_advection_matrix(&space, flux);
        let out = std::slice::from_raw_parts_mut(buf, n * n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = a[(i, j)];
            }
        }
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` as a NUL-terminated
/// string. `needed` (if non-null) receives the size including the terminator.
/// Returns `Buffer` when `buf` is null or shorter than that.
///
/// # Safety
/// `buf` must be null or valid for `len` writes; `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn expdg_last_error_message(
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ExpdgStatus {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let n = e.len() + 1;
        if let Some(needed) = needed.as_mut() {
            *needed = n;
        }
        if buf.is_null() || len < n {
            return ExpdgStatus::Buffer;
        }
        ptr::copy_nonoverlapping(e.as_ptr(), buf as *mut u8, e.len());
        *buf.add(e.len()) = 0;
        ExpdgStatus::Ok
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn expdg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
