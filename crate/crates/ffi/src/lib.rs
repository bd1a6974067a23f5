//! C interface to residua.
//!
//! Every function returns a [`ResiduaStatus`]; on failure the message is
//! available from [`residua_last_error`] on the same thread. Objects are
//! opaque handles released with their `_free` function; strings handed out
//! by the library are released with [`residua_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use residua::constraints::{parse_constraints, ConstraintSet};
use residua::driver::{self, DriverError, Outputs};
use residua::frontend::ast::Program;
use residua::frontend::parse_program;
use residua::interp::{diff_test, Verdict};
use residua::specializer::{specialize_program, SpecializeConfig, Specialization, DEFAULT_VARIANT_CAP};

/// Result code of every call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResiduaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Syntax = 4,
    Constraint = 5,
    Policy = 6,
    Specialize = 7,
    /// The residual disagreed with the original under differential testing.
    VerificationFailed = 8,
    Panic = 99,
}

/// Parsed source program.
pub struct ResiduaProgram {
    program: Program,
}

/// Parsed constraint file.
pub struct ResiduaConstraints {
    set: ConstraintSet,
}

/// A finished specialization together with the program it came from.
pub struct ResiduaSpecialization {
    original: Program,
    spec: Specialization,
}

/// Which files [`residua_specialization_write`] produces.
pub const RESIDUA_EMIT_PROGRAM: u32 = 1;
pub const RESIDUA_EMIT_JSON: u32 = 2;
pub const RESIDUA_EMIT_HTML: u32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ResiduaStatus, String);

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        let status = match &e {
            DriverError::Io { .. } | DriverError::NoSources(_) => ResiduaStatus::Io,
            DriverError::Frontend(_) => ResiduaStatus::Syntax,
            DriverError::Constraint { .. } => ResiduaStatus::Constraint,
            DriverError::KeepList { .. } | DriverError::Policy(_) => ResiduaStatus::Policy,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ResiduaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ResiduaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)".into());
            ResiduaStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ResiduaStatus::NullArgument, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ResiduaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn strings<'a>(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<&'a str>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(p, n).iter().map(|s| c_str(*s, what)).collect()
}

unsafe fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn residua_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn residua_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn residua_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `n` in-memory source files.
///
/// # Safety
/// `names` and `texts` must point to `n` valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn residua_program_parse(
    names: *const *const c_char,
    texts: *const *const c_char,
    n: usize,
    out: *mut *mut ResiduaProgram,
) -> ResiduaStatus {
    guard(|| {
        let names = strings(names, n, "names")?;
        let texts = strings(texts, n, "texts")?;
        let files: Vec<(&str, &str)> = names.into_iter().zip(texts).collect();
        let program = parse_program(&files).map_err(|e| Failure(ResiduaStatus::Syntax, e.to_string()))?;
        out_ptr(out, ResiduaProgram { program })
    })
}

/// Loads source files; directories expand to their `.f` files.
///
/// # Safety
/// `paths` must point to `n` valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn residua_program_load(
    paths: *const *const c_char,
    n: usize,
    out: *mut *mut ResiduaProgram,
) -> ResiduaStatus {
    guard(|| {
        let paths: Vec<PathBuf> = strings(paths, n, "paths")?.into_iter().map(PathBuf::from).collect();
        let program = driver::load_program(&paths)?;
        out_ptr(out, ResiduaProgram { program })
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residua_program_free(p: *mut ResiduaProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Parses constraint text (`GLOBAL:` / `UNIT name:` sections).
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn residua_constraints_parse(
    text: *const c_char,
    out: *mut *mut ResiduaConstraints,
) -> ResiduaStatus {
    guard(|| {
        let set = parse_constraints(c_str(text, "text")?)
            .map_err(|e| Failure(ResiduaStatus::Constraint, e.to_string()))?;
        out_ptr(out, ResiduaConstraints { set })
    })
}

/// Reads and parses a constraint file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn residua_constraints_load(
    path: *const c_char,
    out: *mut *mut ResiduaConstraints,
) -> ResiduaStatus {
    guard(|| {
        let set = driver::load_constraints(PathBuf::from(c_str(path, "path")?).as_path())?;
        out_ptr(out, ResiduaConstraints { set })
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residua_constraints_free(c: *mut ResiduaConstraints) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Specializes `program`. `constraints` may be NULL (no bindings);
/// `policy` is `all`, `none` or `keep:<file>` (NULL means `all`);
/// `variant_cap` 0 selects the default.
///
/// # Safety
/// Handles must be live; `policy` NULL or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn residua_specialize(
    program: *const ResiduaProgram,
    constraints: *const ResiduaConstraints,
    policy: *const c_char,
    variant_cap: usize,
    out: *mut *mut ResiduaSpecialization,
) -> ResiduaStatus {
    guard(|| {
        let program = program.as_ref().ok_or_else(|| null("program"))?;
        let empty = ConstraintSet::new();
        let cs = constraints.as_ref().map_or(&empty, |c| &c.set);
        let policy = if policy.is_null() { "all" } else { c_str(policy, "policy")? };
        let config = SpecializeConfig {
            policy: driver::load_policy(policy)?,
            variant_cap: if variant_cap == 0 { DEFAULT_VARIANT_CAP } else { variant_cap },
        };
        let spec = specialize_program(&program.program, cs, &config)
            .map_err(|e| Failure(ResiduaStatus::Specialize, e.to_string()))?;
        out_ptr(
            out,
            ResiduaSpecialization {
                original: program.program.clone(),
                spec,
            },
        )
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residua_specialization_free(s: *mut ResiduaSpecialization) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// The report as JSON. Free the result with [`residua_string_free`].
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn residua_specialization_report_json(
    s: *const ResiduaSpecialization,
    out: *mut *mut c_char,
) -> ResiduaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("specialization"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = owned(s.spec.report.to_json());
        Ok(())
    })
}

/// All residual source files concatenated in file-name order. Free the
/// result with [`residua_string_free`].
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn residua_specialization_source(
    s: *const ResiduaSpecialization,
    out: *mut *mut c_char,
) -> ResiduaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("specialization"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = owned(driver::residual_sources(&s.spec).into_values().collect());
        Ok(())
    })
}

/// Differential test of the residual against the original. Returns
/// `VerificationFailed` (with the counterexample as the error message)
/// when they disagree.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn residua_specialization_verify(
    s: *const ResiduaSpecialization,
    trials: usize,
    seed: u64,
) -> ResiduaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("specialization"))?;
        let v = diff_test(&s.original, &s.spec.program, &s.spec.constraints, trials, seed)
            .map_err(|e| Failure(ResiduaStatus::Specialize, e.to_string()))?;
        match v {
            Verdict::Pass { .. } => Ok(()),
            Verdict::Fail(cx) => Err(Failure(
                ResiduaStatus::VerificationFailed,
                format!(
                    "residual differs on trial {}: input {:?}, original {:?}, residual {:?}",
                    cx.trial, cx.input, cx.original, cx.residual
                ),
            )),
        }
    })
}

/// Writes the selected outputs (`RESIDUA_EMIT_*` flags) under `dir`.
///
/// # Safety
/// `s` must be a live handle; `dir` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn residua_specialization_write(
    s: *const ResiduaSpecialization,
    dir: *const c_char,
    what: u32,
) -> ResiduaStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("specialization"))?;
        let dir = PathBuf::from(c_str(dir, "dir")?);
        let outputs = Outputs {
            program: what & RESIDUA_EMIT_PROGRAM != 0,
            json: what & RESIDUA_EMIT_JSON != 0,
            html: what & RESIDUA_EMIT_HTML != 0,
        };
        let files = driver::render_outputs(&s.original, &s.spec, outputs);
        driver::write_outputs(&dir, &files)?;
        Ok(())
    })
}
