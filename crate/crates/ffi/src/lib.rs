//! C ABI over `evobench-core`.
//!
//! Units and profiles cross the boundary as opaque handles owned by the
//! caller and released with the matching `_free` function. Every fallible
//! call returns an [`EvobenchStatus`]; on failure a message is available from
//! [`evobench_last_error`] until the next call on the same thread. Strings
//! returned through out-parameters are released with
//! [`evobench_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use evobench_core::metrics::{measure, ReferenceProfile};
use evobench_core::operators::{apply_operator, operator_locations, OperatorId};
use evobench_core::unit::ProgramUnit;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvobenchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Profile = 4,
    UnknownOperator = 5,
    NotApplicable = 6,
    Operator = 7,
    Panic = 8,
}

/// A parsed program unit.
pub struct EvobenchUnit(ProgramUnit);

/// A reference profile of complexity and readability thresholds.
pub struct EvobenchProfile(ReferenceProfile);

/// Relative complexity and relative readability, both in [0, 1].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvobenchFitness {
    pub rc: f64,
    pub rr: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: EvobenchStatus, message: impl AsRef<str>) -> EvobenchStatus {
    set_error(message.as_ref());
    status
}

/// Runs `body` with panics mapped to [`EvobenchStatus::Panic`].
fn guarded(body: impl FnOnce() -> EvobenchStatus) -> EvobenchStatus {
    set_error("");
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| fail(EvobenchStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, EvobenchStatus> {
    if p.is_null() {
        return Err(fail(EvobenchStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(EvobenchStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> EvobenchStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            EvobenchStatus::Ok
        }
        Err(e) => fail(EvobenchStatus::InvalidUtf8, e.to_string()),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(EvobenchStatus::NullPointer, concat!("null argument: ", stringify!($p)));
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evobench_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn evobench_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a single-file unit from Python source.
///
/// # Safety
/// `id` and `source` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_unit_parse(
    id: *const c_char,
    source: *const c_char,
    out: *mut *mut EvobenchUnit,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(out);
        let id = try_ffi!(read_str(id));
        let source = try_ffi!(read_str(source));
        match ProgramUnit::from_source(id, source) {
            Ok(u) => {
                *out = Box::into_raw(Box::new(EvobenchUnit(u)));
                EvobenchStatus::Ok
            }
            Err(e) => fail(EvobenchStatus::Syntax, e.to_string()),
        }
    })
}

/// # Safety
/// `unit` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evobench_unit_free(unit: *mut EvobenchUnit) {
    if !unit.is_null() {
        drop(Box::from_raw(unit));
    }
}

/// Emits the unit's entry source file.
///
/// # Safety
/// `unit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_unit_source(unit: *const EvobenchUnit, out: *mut *mut c_char) -> EvobenchStatus {
    guarded(|| {
        non_null!(unit, out);
        let u = &(*unit).0;
        let texts = u.source_texts();
        match texts.get(&u.manifest.entry).or_else(|| texts.values().next()) {
            Some(t) => put_string(out, t.clone()),
            None => fail(EvobenchStatus::Syntax, "unit has no source files"),
        }
    })
}

/// Loads the profile shipped with the library.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_profile_shipped(out: *mut *mut EvobenchProfile) -> EvobenchStatus {
    guarded(|| {
        non_null!(out);
        *out = Box::into_raw(Box::new(EvobenchProfile(ReferenceProfile::shipped())));
        EvobenchStatus::Ok
    })
}

/// Parses a profile from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_profile_from_json(
    json: *const c_char,
    out: *mut *mut EvobenchProfile,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(out);
        let text = try_ffi!(read_str(json));
        match ReferenceProfile::from_json(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(EvobenchProfile(p)));
                EvobenchStatus::Ok
            }
            Err(e) => fail(EvobenchStatus::Profile, e.to_string()),
        }
    })
}

/// # Safety
/// `profile` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evobench_profile_free(profile: *mut EvobenchProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Relative complexity and readability of a unit under a profile.
///
/// # Safety
/// `unit` and `profile` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_measure(
    unit: *const EvobenchUnit,
    profile: *const EvobenchProfile,
    out: *mut EvobenchFitness,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(unit, profile, out);
        let m = measure(&(*unit).0, &(*profile).0);
        *out = EvobenchFitness {
            rc: m.fitness.rc,
            rr: m.fitness.rr,
        };
        EvobenchStatus::Ok
    })
}

/// All metric vectors and fitness of a unit as a JSON object.
///
/// # Safety
/// `unit` and `profile` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_measure_json(
    unit: *const EvobenchUnit,
    profile: *const EvobenchProfile,
    out: *mut *mut c_char,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(unit, profile, out);
        let m = measure(&(*unit).0, &(*profile).0);
        match serde_json::to_string(&m) {
            Ok(s) => put_string(out, s),
            Err(e) => fail(EvobenchStatus::Panic, e.to_string()),
        }
    })
}

/// Number of locations where the operator named `code` (e.g. `"S5"`)
/// applies.
///
/// # Safety
/// `unit` must be a live handle; `code` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_operator_locations(
    unit: *const EvobenchUnit,
    code: *const c_char,
    out: *mut usize,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(unit, out);
        let op: OperatorId = match try_ffi!(read_str(code)).parse() {
            Ok(op) => op,
            Err(e) => return fail(EvobenchStatus::UnknownOperator, e),
        };
        *out = operator_locations(&(*unit).0, op).len();
        EvobenchStatus::Ok
    })
}

/// Applies operator `code` at location `index` with generator seed `seed`,
/// returning a new unit; the input handle is left unchanged.
///
/// # Safety
/// `unit` must be a live handle; `code` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn evobench_apply_operator(
    unit: *const EvobenchUnit,
    code: *const c_char,
    index: usize,
    seed: u64,
    out: *mut *mut EvobenchUnit,
) -> EvobenchStatus {
    guarded(|| {
        non_null!(unit, out);
        let op: OperatorId = match try_ffi!(read_str(code)).parse() {
            Ok(op) => op,
            Err(e) => return fail(EvobenchStatus::UnknownOperator, e),
        };
        let u = &(*unit).0;
        let locs = operator_locations(u, op);
        let Some(loc) = locs.get(index) else {
            return fail(
                EvobenchStatus::NotApplicable,
                format!("{} has {} locations, index {index} requested", op.code(), locs.len()),
            );
        };
        match apply_operator(u, op, loc, seed) {
            Ok((t, _)) => {
                *out = Box::into_raw(Box::new(EvobenchUnit(t)));
                EvobenchStatus::Ok
            }
            Err(e) => fail(EvobenchStatus::Operator, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evobench_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
