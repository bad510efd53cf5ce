//! C ABI over `algebroid_poisson`.
//!
//! Models and functions are opaque handles created by `ap_*_from_*` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`ApStatus`]; on failure [`ap_last_error`] describes the cause on the
//! calling thread. Strings returned through `char **` must be released with
//! [`ap_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use algebroid_poisson::algebroid::AlgebroidModel;
use algebroid_poisson::funcalg::{BundlePoint, SmoothFn};
use algebroid_poisson::poisson::{self, CotangentAtom};
use algebroid_poisson::presets::Preset;
use algebroid_poisson::reconstruct::{roundtrip_check, RoundtripConfig};
use algebroid_poisson::report::Report;
use algebroid_poisson::suite::{run_identity_suite, SuiteConfig};
use algebroid_poisson::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Dimension = 4,
    Validation = 5,
    Precondition = 6,
    Numerical = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque algebroid model.
pub struct ApModel {
    inner: AlgebroidModel,
}

/// Opaque smooth function on the predual bundle.
pub struct ApFunction {
    inner: SmoothFn,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> ApStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => ApStatus::Parse,
        Error::Dimension(_) | Error::Role(_) => ApStatus::Dimension,
        Error::Validation(_) | Error::Family(_) => ApStatus::Validation,
        Error::Precondition(_) => ApStatus::Precondition,
        Error::NotLinear { .. } | Error::OracleInconsistency(_) | Error::Blowup { .. } => {
            ApStatus::Numerical
        }
        Error::Io(_) => ApStatus::Io,
    }
}

struct Fail(ApStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ApStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ApStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ApStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ApStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ApStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_slice(p: *mut f64, data: &[f64], what: &str) -> Result<(), Fail> {
    if data.is_empty() {
        return Ok(());
    }
    if p.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), p, data.len());
    Ok(())
}

unsafe fn model_ref<'a>(m: *const ApModel) -> Result<&'a AlgebroidModel, Fail> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn function_ref<'a>(f: *const ApFunction) -> Result<&'a SmoothFn, Fail> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| null("function"))
}

unsafe fn point(
    model: &AlgebroidModel,
    m: *const f64,
    phi: *const f64,
) -> Result<BundlePoint, Fail> {
    let m = read_slice(m, model.base_dim(), "m")?;
    let phi = read_slice(phi, model.fiber_dim(), "phi")?;
    Ok(BundlePoint::new(m.to_vec(), phi.to_vec()))
}

fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output string pointer"));
    }
    let c = CString::new(s).map_err(|_| Fail(ApStatus::Parse, "string contains nul".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a preset: `so3`, `sl2`, `precotangent:N`, `seqtriple:N[:weights=unit]`.
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_model_from_preset(
    name: *const c_char,
    out: *mut *mut ApModel,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = read_str(name, "name")?.parse::<Preset>()?.build()?;
        *out = Box::into_raw(Box::new(ApModel { inner: model }));
        Ok(())
    })
}

/// Load a model from its JSON description.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_model_from_json(
    json: *const c_char,
    out: *mut *mut ApModel,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v: serde_json::Value =
            serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(ApModel {
            inner: AlgebroidModel::from_json(&v)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `ap_model_from_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ap_model_free(model: *mut ApModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ap_model_base_dim(model: *const ApModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.base_dim())
}

/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ap_model_fiber_dim(model: *const ApModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.fiber_dim())
}

/// Parse a function from the JSON expression format.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_function_from_json(
    json: *const c_char,
    out: *mut *mut ApFunction,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v: serde_json::Value =
            serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(ApFunction {
            inner: SmoothFn::from_json(&v)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `f` must come from `ap_function_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ap_function_free(f: *mut ApFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `{f, g}(m, phi)`. `m` has `base_dim` entries and `phi` has `fiber_dim`.
///
/// # Safety
/// All pointers must be valid for the model's dimensions.
#[no_mangle]
pub unsafe extern "C" fn ap_poisson_bracket(
    model: *const ApModel,
    f: *const ApFunction,
    g: *const ApFunction,
    m: *const f64,
    phi: *const f64,
    out: *mut f64,
) -> ApStatus {
    guard(|| {
        let model = model_ref(model)?;
        let pt = point(model, m, phi)?;
        let v = poisson::poisson_bracket(model, function_ref(f)?, function_ref(g)?, &pt)?;
        write_slice(out, &[v], "out")
    })
}

/// Value and partial derivatives of `f` at `(m, phi)`; `d_m` and `d_phi`
/// receive `base_dim` and `fiber_dim` entries.
///
/// # Safety
/// All pointers must be valid for the model's dimensions.
#[no_mangle]
pub unsafe extern "C" fn ap_jet(
    model: *const ApModel,
    f: *const ApFunction,
    m: *const f64,
    phi: *const f64,
    value: *mut f64,
    d_m: *mut f64,
    d_phi: *mut f64,
) -> ApStatus {
    guard(|| {
        let model = model_ref(model)?;
        let f = function_ref(f)?;
        f.check_dims(model.base_dim(), model.fiber_dim())?;
        let jet = f.jet(&point(model, m, phi)?)?;
        write_slice(value, &[jet.value], "value")?;
        write_slice(d_m, &jet.d_m, "d_m")?;
        write_slice(d_phi, &jet.d_phi, "d_phi")
    })
}

/// Sharp map at `(m, phi)` applied to the covector `(mu, x)`; writes
/// `v` (`base_dim`) and `psi` (`fiber_dim`).
///
/// # Safety
/// All pointers must be valid for the model's dimensions.
#[no_mangle]
pub unsafe extern "C" fn ap_sharp(
    model: *const ApModel,
    m: *const f64,
    phi: *const f64,
    mu: *const f64,
    x: *const f64,
    v: *mut f64,
    psi: *mut f64,
) -> ApStatus {
    guard(|| {
        let model = model_ref(model)?;
        let atom = CotangentAtom {
            base_pt: point(model, m, phi)?,
            mu: read_slice(mu, model.base_dim(), "mu")?.to_vec(),
            x: read_slice(x, model.fiber_dim(), "x")?.to_vec(),
        };
        let t = poisson::sharp(model, &atom)?;
        write_slice(v, &t.v, "v")?;
        write_slice(psi, &t.psi, "psi")
    })
}

/// Run the identity suite; `*report` receives the JSON report and
/// `*all_pass` whether every check passed.
///
/// # Safety
/// `model` must be live; `report` and `all_pass` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ap_verify(
    model: *const ApModel,
    seed: u64,
    draws: usize,
    report: *mut *mut c_char,
    all_pass: *mut bool,
) -> ApStatus {
    guard(|| {
        let model = model_ref(model)?;
        let mut r = Report::for_model("verify", model, seed);
        r.checks = run_identity_suite(
            model,
            &SuiteConfig {
                seed,
                draws,
                ..Default::default()
            },
        )?;
        if all_pass.is_null() {
            return Err(null("all_pass"));
        }
        *all_pass = r.all_pass();
        give_string(report, r.to_pretty_json())
    })
}

/// Recover anchor and bracket from the model's Poisson structure and
/// compare; same outputs as [`ap_verify`].
///
/// # Safety
/// `model` must be live; `report` and `all_pass` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ap_roundtrip(
    model: *const ApModel,
    seed: u64,
    report: *mut *mut c_char,
    all_pass: *mut bool,
) -> ApStatus {
    guard(|| {
        let model = model_ref(model)?;
        let mut r = Report::for_model("roundtrip", model, seed);
        r.checks = roundtrip_check(
            model,
            &RoundtripConfig {
                seed,
                ..Default::default()
            },
        )?;
        if all_pass.is_null() {
            return Err(null("all_pass"));
        }
        *all_pass = r.all_pass();
        give_string(report, r.to_pretty_json())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_maps_to_a_status() {
        assert_eq!(status_of(&Error::Blowup { step: 1 }), ApStatus::Numerical);
        assert_eq!(status_of(&Error::Parse("x".into())), ApStatus::Parse);
        assert_eq!(status_of(&Error::Role("x".into())), ApStatus::Dimension);
    }

    #[test]
    fn panics_are_contained() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, ApStatus::Panic);
        assert!(!ap_last_error().is_null());
    }
}
