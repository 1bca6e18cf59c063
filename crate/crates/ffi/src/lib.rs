//! C ABI over the toricmmp engine.
//!
//! Every function returns a `ToricStatus`; on failure `toric_last_error` describes the cause.
//! Handles are opaque and owned by the caller, who releases them with the matching `_free`.
//! Strings returned through `char **` are released with `toric_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toricmmp::cli::{parse_divisor, parse_fan, FanInput};
use toricmmp::cohomology::line_bundle_cohomology;
use toricmmp::divisor::{classify_pair, InvariantDivisor};
use toricmmp::mmp::{run_mmp, MmpOptions, MmpOutcome};
use toricmmp::mori::{is_projective, numerical_spaces};
use toricmmp::verify::verify_example;
use toricmmp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToricStatus {
    Ok = 0,
    NullPointer = 1,
    ParseError = 2,
    InvalidInput = 3,
    ComputationError = 4,
    Panic = 5,
}

/// A validated fan.
pub struct ToricFan {
    input: FanInput,
}

/// An invariant divisor on a specific fan.
pub struct ToricDivisor {
    divisor: InvariantDivisor,
    rays: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> ToricStatus {
    match e {
        Error::Parse { .. } => ToricStatus::ParseError,
        Error::CoefficientCount { .. } | Error::UnknownExample(_) | Error::Invalid(_) | Error::RayIndexOutOfRange { .. } => {
            ToricStatus::InvalidInput
        }
        _ => ToricStatus::ComputationError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ToricStatus>) -> ToricStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ToricStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ToricStatus::Panic
        }
    }
}

fn fail(e: Error) -> ToricStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ToricStatus {
    set_error(format!("null pointer: {what}"));
    ToricStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, ToricStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        ToricStatus::InvalidInput
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut());
}

/// Message of the last failure on this thread; empty after a success. Valid until the next call.
#[no_mangle]
pub extern "C" fn toric_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Engine version as a static string.
#[no_mangle]
pub extern "C" fn toric_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn toric_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a fan document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_fan_from_json(json: *const c_char, out: *mut *mut ToricFan) -> ToricStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let input = parse_fan(text, "fan").map_err(fail)?;
        *out = Box::into_raw(Box::new(ToricFan { input }));
        Ok(())
    })
}

/// # Safety
/// `fan` must be null or a handle from `toric_fan_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toric_fan_free(fan: *mut ToricFan) {
    if !fan.is_null() {
        drop(Box::from_raw(fan));
    }
}

unsafe fn fan_ref<'a>(fan: *const ToricFan) -> Result<&'a ToricFan, ToricStatus> {
    fan.as_ref().ok_or_else(|| null("fan"))
}

/// # Safety
/// `fan` must be a live handle and `dim`, `rays` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn toric_fan_shape(fan: *const ToricFan, dim: *mut usize, rays: *mut usize) -> ToricStatus {
    guard(|| {
        let f = fan_ref(fan)?;
        if dim.is_null() || rays.is_null() {
            return Err(null("out"));
        }
        *dim = f.input.fan.dim();
        *rays = f.input.fan.rays().len();
        Ok(())
    })
}

/// Completeness, simpliciality and projectivity of a fan.
///
/// # Safety
/// `fan` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toric_fan_properties(
    fan: *const ToricFan,
    complete: *mut bool,
    simplicial: *mut bool,
    projective: *mut bool,
) -> ToricStatus {
    guard(|| {
        let f = &fan_ref(fan)?.input.fan;
        if complete.is_null() || simplicial.is_null() || projective.is_null() {
            return Err(null("out"));
        }
        *complete = f.is_complete();
        *simplicial = f.is_simplicial();
        *projective = is_projective(f).map_err(fail)?.projective;
        Ok(())
    })
}

/// Picard number rho = dim N^1(X).
///
/// # Safety
/// `fan` must be a live handle and `rho` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_fan_picard_number(fan: *const ToricFan, rho: *mut usize) -> ToricStatus {
    guard(|| {
        let f = &fan_ref(fan)?.input.fan;
        if rho.is_null() {
            return Err(null("rho"));
        }
        *rho = numerical_spaces(f, None).map_err(fail)?.rho;
        Ok(())
    })
}

/// Parses a divisor document against a fan.
///
/// # Safety
/// `fan` must be a live handle, `json` a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_divisor_from_json(
    fan: *const ToricFan,
    json: *const c_char,
    out: *mut *mut ToricDivisor,
) -> ToricStatus {
    guard(|| {
        let f = fan_ref(fan)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let divisor = parse_divisor(text, "divisor", &f.input).map_err(fail)?;
        *out = Box::into_raw(Box::new(ToricDivisor { divisor, rays: f.input.fan.rays().len() }));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle from `toric_divisor_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toric_divisor_free(d: *mut ToricDivisor) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

unsafe fn divisor_or_zero(f: &ToricFan, d: *const ToricDivisor) -> Result<InvariantDivisor, ToricStatus> {
    match d.as_ref() {
        None => Ok(InvariantDivisor::zero(f.input.fan.rays().len())),
        Some(d) if d.rays == f.input.fan.rays().len() => Ok(d.divisor.clone()),
        Some(d) => Err(fail(Error::CoefficientCount { expected: f.input.fan.rays().len(), found: d.rays })),
    }
}

/// Singularity verdict of (X, boundary) as a string ("terminal", "canonical", "klt", "lc", ...).
/// A null boundary means the zero divisor.
///
/// # Safety
/// `fan` must be a live handle, `boundary` null or live, `verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_classify_pair(
    fan: *const ToricFan,
    boundary: *const ToricDivisor,
    verdict: *mut *mut c_char,
) -> ToricStatus {
    guard(|| {
        let f = fan_ref(fan)?;
        if verdict.is_null() {
            return Err(null("verdict"));
        }
        let d = divisor_or_zero(f, boundary)?;
        write_string(verdict, classify_pair(&f.input.fan, &d).verdict.to_string());
        Ok(())
    })
}

/// Runs the (K + boundary)-MMP. Writes the number of steps, whether it ended in a Mori fibre space,
/// and (when `final_fan` is not null) the last fan as a JSON document.
///
/// # Safety
/// `fan` must be a live handle, `boundary` null or live; `steps` and `fibre_space` valid pointers;
/// `final_fan` null or valid.
#[no_mangle]
pub unsafe extern "C" fn toric_run_mmp(
    fan: *const ToricFan,
    boundary: *const ToricDivisor,
    steps: *mut usize,
    fibre_space: *mut bool,
    final_fan: *mut *mut c_char,
) -> ToricStatus {
    guard(|| {
        let f = fan_ref(fan)?;
        if steps.is_null() || fibre_space.is_null() {
            return Err(null("out"));
        }
        let d = divisor_or_zero(f, boundary)?;
        let t = run_mmp(&f.input.fan, &d, None, MmpOptions::default()).map_err(fail)?;
        *steps = t.steps.len();
        *fibre_space = t.outcome == MmpOutcome::MoriFiberSpace;
        if !final_fan.is_null() {
            write_string(final_fan, toricmmp::cli::fan_document(&t.fan, None).to_string());
        }
        Ok(())
    })
}

/// h^i(X, O(D)) for a complete fan.
///
/// # Safety
/// `fan` and `d` must be live handles and `h` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_cohomology(fan: *const ToricFan, d: *const ToricDivisor, degree: usize, h: *mut usize) -> ToricStatus {
    guard(|| {
        let f = fan_ref(fan)?;
        if d.is_null() {
            return Err(null("divisor"));
        }
        if h.is_null() {
            return Err(null("h"));
        }
        let d = divisor_or_zero(f, d)?;
        *h = line_bundle_cohomology(&f.input.fan, &d).map_err(fail)?.h(degree);
        Ok(())
    })
}

/// Runs the assertions of a built-in example.
///
/// # Safety
/// `id` must be a NUL-terminated string and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toric_verify_example(id: *const c_char, passed: *mut bool) -> ToricStatus {
    guard(|| {
        let id = read_str(id, "id")?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let r = verify_example(id, None).map_err(fail)?;
        *passed = r.passed();
        Ok(())
    })
}
