//! C ABI over the `oddflow` solvers.
//!
//! Every fallible function returns one of the `ODDFLOW_*` status codes and
//! records a message retrievable with [`oddflow_last_error`] on the calling
//! thread. Objects are opaque handles released by their `*_free` function.
//! Panics never cross the boundary; they are reported as `ODDFLOW_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use oddflow::app;
use oddflow::config::RunConfig;
use oddflow::evolve::{initial_state, step, EvolveConfig, Forcing, InitialData, SimulationState};
use oddflow::field::{Grid2D, ScalarField, VectorField};
use oddflow::io::{read_field, write_field, FieldDump, FieldKind};
use oddflow::stationary::{manufactured, picard_solve, DEFAULT_DAMPING, DEFAULT_TOL};
use oddflow::symmetric::{solve_parallel, ParallelMode, ParallelProblem, Profile};
use oddflow::viscosity::{DensityBounds, ScalarLaw, ViscosityLaw};
use oddflow::Error;

pub const ODDFLOW_OK: c_int = 0;
pub const ODDFLOW_NULL_POINTER: c_int = 1;
pub const ODDFLOW_INVALID_INPUT: c_int = 2;
pub const ODDFLOW_SOLVER_FAILURE: c_int = 3;
pub const ODDFLOW_IO_ERROR: c_int = 4;
pub const ODDFLOW_PANIC: c_int = 5;

pub const ODDFLOW_FIELD_RHO: c_int = 0;
pub const ODDFLOW_FIELD_U1: c_int = 1;
pub const ODDFLOW_FIELD_U2: c_int = 2;
pub const ODDFLOW_FIELD_PRESSURE: c_int = 3;

static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
    Ok(v) => v,
    Err(_) => panic!("version string"),
};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

/// Shear and odd viscosity laws with density bounds.
pub struct OddflowLaw {
    inner: ViscosityLaw,
}

/// Periodic simulation advanced step by step.
pub struct OddflowSimulation {
    config: EvolveConfig,
    state: SimulationState,
}

/// A field dump held in memory.
pub struct OddflowField {
    inner: FieldDump,
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FfiResult = Result<(), Fail>;

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status(e: &Error) -> c_int {
    match e {
        Error::Io(_) | Error::Dump(_) => ODDFLOW_IO_ERROR,
        _ => match app::exit_code(e) {
            app::EXIT_SOLVER => ODDFLOW_SOLVER_FAILURE,
            _ => ODDFLOW_INVALID_INPUT,
        },
    }
}

fn guard(body: impl FnOnce() -> FfiResult) -> c_int {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ODDFLOW_OK,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("`{name}` is a null pointer"));
            ODDFLOW_NULL_POINTER
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ODDFLOW_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::param(name, "not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

fn copy_into(src: &[f64], buf: *mut f64, len: usize) -> FfiResult {
    if buf.is_null() {
        return Err(Fail::Null("buffer"));
    }
    if len < src.len() {
        return Err(Error::ShapeMismatch { expected: src.len(), actual: len }.into());
    }
    // SAFETY: the caller provides `len >= src.len()` writable values.
    unsafe { std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oddflow_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// including the terminator, so a call with `len == 0` sizes the buffer.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn oddflow_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Viscosity laws from specification strings (`const:v`, `affine:a,b`,
/// `prop:c`, `sin:base,amp`, `table:path`) on `[rho_min, rho_max]`. The
/// bounds `mu_*`, `mu^*` are the sampled extremes of the laws.
///
/// # Safety
/// `nu_e` and `nu_o` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_law_new(
    nu_e: *const c_char,
    nu_o: *const c_char,
    rho_min: f64,
    rho_max: f64,
    out_law: *mut *mut OddflowLaw,
) -> c_int {
    guard(|| {
        let slot = out(out_law, "out_law")?;
        let ne = ScalarLaw::parse(text(nu_e, "nu_e")?)?;
        let no = ScalarLaw::parse(text(nu_o, "nu_o")?)?;
        let inner = ViscosityLaw::with_tight_bounds(ne, no, DensityBounds::new(rho_min, rho_max)?)?;
        *slot = Box::into_raw(Box::new(OddflowLaw { inner }));
        Ok(())
    })
}

/// `ν_e(ρ)` and `ν_o(ρ)`; either output may be null.
///
/// # Safety
/// `law` must come from [`oddflow_law_new`].
#[no_mangle]
pub unsafe extern "C" fn oddflow_law_eval(law: *const OddflowLaw, rho: f64, nu_e: *mut f64, nu_o: *mut f64) -> c_int {
    guard(|| {
        let law = &handle(law, "law")?.inner;
        if let Some(v) = nu_e.as_mut() {
            *v = law.nu_e().eval(rho);
        }
        if let Some(v) = nu_o.as_mut() {
            *v = law.nu_o().eval(rho);
        }
        Ok(())
    })
}

/// # Safety
/// `law` must be null or come from [`oddflow_law_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oddflow_law_free(law: *mut OddflowLaw) {
    free(law);
}

/// Periodic simulation on an `n x n` grid of side `length` without forcing.
/// `rho`, `u1`, `u2` hold `n*n` values with the sample at `(i h, j h)` at
/// index `i*n + j`; `u` must be divergence-free. Each step has length `dt`.
///
/// # Safety
/// `law` must be a live handle, the arrays must hold `n*n` values and
/// `out_sim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_simulation_new(
    law: *const OddflowLaw,
    n: usize,
    length: f64,
    dt: f64,
    rho: *const f64,
    u1: *const f64,
    u2: *const f64,
    out_sim: *mut *mut OddflowSimulation,
) -> c_int {
    guard(|| {
        let slot = out(out_sim, "out_sim")?;
        let law = handle(law, "law")?.inner.clone();
        let grid = Grid2D::new(n, n, length, length)?;
        let m = grid.len();
        let rho = ScalarField::new(grid, slice(rho, m, "rho")?.to_vec())?;
        let u = VectorField::new(grid, slice(u1, m, "u1")?.to_vec(), slice(u2, m, "u2")?.to_vec())?;
        let config = EvolveConfig::new(grid, dt, dt, law)?;
        let state = initial_state(&config, &InitialData::new(rho, u, Forcing::Zero))?;
        *slot = Box::into_raw(Box::new(OddflowSimulation { config, state }));
        Ok(())
    })
}

/// Advances `steps` steps. On failure the state is left at the last good step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oddflow_simulation_step(sim: *mut OddflowSimulation, steps: usize) -> c_int {
    guard(|| {
        let sim = out(sim, "sim")?;
        for _ in 0..steps {
            sim.state = step(&sim.state, &sim.config, &Forcing::Zero)?;
        }
        Ok(())
    })
}

/// Current time and `∫ρ|u|²`; either output may be null.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oddflow_simulation_status(sim: *const OddflowSimulation, time: *mut f64, kinetic: *mut f64) -> c_int {
    guard(|| {
        let sim = handle(sim, "sim")?;
        if let Some(t) = time.as_mut() {
            *t = sim.state.t;
        }
        if let Some(k) = kinetic.as_mut() {
            *k = sim.state.kinetic_energy();
        }
        Ok(())
    })
}

/// Copies one of `ODDFLOW_FIELD_*` into `buf`, which holds `len >= n*n` values.
///
/// # Safety
/// `sim` must be a live handle and `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn oddflow_simulation_field(sim: *const OddflowSimulation, which: c_int, buf: *mut f64, len: usize) -> c_int {
    guard(|| {
        let s = &handle(sim, "sim")?.state;
        let src = match which {
            ODDFLOW_FIELD_RHO => s.rho.values(),
            ODDFLOW_FIELD_U1 => s.u.comp1(),
            ODDFLOW_FIELD_U2 => s.u.comp2(),
            ODDFLOW_FIELD_PRESSURE => s.pressure.values(),
            other => return Err(Error::param("which", format!("unknown field {other}")).into()),
        };
        copy_into(src, buf, len)
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oddflow_simulation_free(sim: *mut OddflowSimulation) {
    free(sim);
}

/// Picard solve of the manufactured stationary problem on an `n x n` mesh;
/// reports the iteration count and the L² error of the stream function.
///
/// # Safety
/// Outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_stationary_manufactured(n: usize, iterations: *mut usize, l2_error: *mut f64) -> c_int {
    guard(|| {
        let p = manufactured::problem(n)?;
        let s = picard_solve(&p, DEFAULT_DAMPING, DEFAULT_TOL, 200)?;
        if let Some(k) = iterations.as_mut() {
            *k = s.iterations;
        }
        if let Some(e) = l2_error.as_mut() {
            *e = s.phi.sub(&manufactured::phi_nodes(p.domain)).l2_norm();
        }
        Ok(())
    })
}

/// Parallel flow `u = (u1(x2), 0)` on `[0, 1]` with pressure gradient `-c`
/// and wall values `u_a`, `u_b`, odd stress absorbed into the pressure.
/// `rho` is a profile string (`const:v`, `layers:lo,hi,at,width`, ...).
/// Writes the `n + 1` nodal values of `u1` into `profile`.
///
/// # Safety
/// `law` must be a live handle, `rho` a NUL-terminated string and `profile`
/// must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn oddflow_parallel_profile(
    law: *const OddflowLaw,
    rho: *const c_char,
    c: f64,
    u_a: f64,
    u_b: f64,
    n: usize,
    profile: *mut f64,
    len: usize,
) -> c_int {
    guard(|| {
        let law = handle(law, "law")?.inner.clone();
        let rho = Profile::parse(text(rho, "rho")?)?;
        let s = solve_parallel(&ParallelProblem {
            rho,
            law,
            c,
            interval: (0.0, 1.0),
            u_a,
            u_b,
            mode: ParallelMode::PressureAbsorbed,
            n,
        })?;
        copy_into(&s.profile, profile, len)
    })
}

/// Runs a command-line subcommand (`evolve`, `stationary`, `symmetric`,
/// `nonexistence`, `sweep-odd-limit`) on configuration text, writing its
/// artifacts into `out_dir`.
///
/// # Safety
/// All arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn oddflow_run(command: *const c_char, config: *const c_char, out_dir: *const c_char) -> c_int {
    guard(|| {
        let cfg = RunConfig::parse(text(config, "config")?)?;
        let dir = Path::new(text(out_dir, "out_dir")?);
        match text(command, "command")? {
            "evolve" => app::cmd_evolve(&cfg, dir).map(drop),
            "stationary" => app::cmd_stationary(&cfg, dir).map(drop),
            "symmetric" => app::cmd_symmetric(&cfg, dir).map(drop),
            "nonexistence" => app::cmd_nonexistence(&cfg, dir).map(drop),
            "sweep-odd-limit" => app::cmd_sweep(&cfg, dir).map(drop),
            other => Err(Error::param("command", format!("unknown command `{other}`"))),
        }?;
        Ok(())
    })
}

/// Runs the invariant checks whose name contains `filter` (null for all)
/// and stores the number of failures.
///
/// # Safety
/// `filter` must be null or NUL-terminated; `failed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_verify(filter: *const c_char, seed: u64, failed: *mut usize) -> c_int {
    guard(|| {
        let slot = out(failed, "failed")?;
        let filter = if filter.is_null() { None } else { Some(text(filter, "filter")?) };
        let results = app::verify::run_checks(filter, seed, false);
        *slot = results.iter().filter(|r| !r.passed()).count();
        Ok(())
    })
}

/// Reads a field dump.
///
/// # Safety
/// `path` must be NUL-terminated and `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_field_read(path: *const c_char, out_field: *mut *mut OddflowField) -> c_int {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let inner = read_field(text(path, "path")?)?;
        *slot = Box::into_raw(Box::new(OddflowField { inner }));
        Ok(())
    })
}

/// Component count (1, 2 or 4), grid size and time stamp of a dump; the
/// data holds `components * n1 * n2` values.
///
/// # Safety
/// `field` must be a live handle; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn oddflow_field_shape(
    field: *const OddflowField,
    components: *mut usize,
    n1: *mut usize,
    n2: *mut usize,
    time: *mut f64,
) -> c_int {
    guard(|| {
        let f = &handle(field, "field")?.inner;
        if let Some(c) = components.as_mut() {
            *c = f.kind.components();
        }
        if let Some(v) = n1.as_mut() {
            *v = f.n1 as usize;
        }
        if let Some(v) = n2.as_mut() {
            *v = f.n2 as usize;
        }
        if let Some(t) = time.as_mut() {
            *t = f.time;
        }
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle and `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn oddflow_field_data(field: *const OddflowField, buf: *mut f64, len: usize) -> c_int {
    guard(|| copy_into(&handle(field, "field")?.inner.data, buf, len))
}

/// Writes a dump of `components` (1, 2 or 4) fields on an `n1 x n2` grid
/// with side lengths `len1`, `len2`; `data` holds `components * n1 * n2` values.
///
/// # Safety
/// `path` must be NUL-terminated and `data` must hold the stated values.
#[no_mangle]
pub unsafe extern "C" fn oddflow_field_write(
    path: *const c_char,
    components: usize,
    n1: usize,
    n2: usize,
    len1: f64,
    len2: f64,
    time: f64,
    data: *const f64,
) -> c_int {
    guard(|| {
        let kind = match components {
            1 => FieldKind::Scalar,
            2 => FieldKind::Vector,
            4 => FieldKind::Tensor,
            other => return Err(Error::param("components", format!("{other} is not 1, 2 or 4")).into()),
        };
        let values = slice(data, components * n1 * n2, "data")?.to_vec();
        let dump = FieldDump::new(kind, n1, n2, len1, len2, time, values)?;
        write_field(text(path, "path")?, &dump)?;
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oddflow_field_free(field: *mut OddflowField) {
    free(field);
}
