//! C ABI over `cas-core`.
//!
//! Objects are opaque handles created by `*_from_json` / `*_default` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CasStatus`]; on failure `cas_last_error_message` describes the problem.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and must be released with `cas_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cas_core::formal::{evaluate_ledger, AggregateWeights, ContestationLedger};
use cas_core::questionnaire::{score_assessment, AnswerSheet};
use cas_core::report::{render_report, ReportBundle, ReportFormat};
use cas_core::{Error, WeightConfig};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    SchemaVersion = 5,
    UndefinedRate = 6,
    UnsupportedFormat = 7,
    Internal = 8,
}

/// Weight configuration handle.
pub struct CasWeights(WeightConfig);

/// Answer sheet handle.
pub struct CasSheet(AnswerSheet);

/// Contestation ledger handle.
pub struct CasLedger(ContestationLedger);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> CasStatus {
    match e {
        Error::Json(_) => CasStatus::ParseError,
        Error::SchemaVersion { .. } => CasStatus::SchemaVersion,
        Error::UndefinedSuccessRate(_) => CasStatus::UndefinedRate,
        Error::UnsupportedFormat(_) => CasStatus::UnsupportedFormat,
        Error::Io(_) | Error::InjectedFault(_) => CasStatus::Internal,
        _ => CasStatus::ValidationError,
    }
}

/// Runs `f`, recording any error or panic and mapping it to a status.
fn guard(f: impl FnOnce() -> Result<(), CasStatus>) -> CasStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CasStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            CasStatus::Internal
        }
    }
}

fn fail(e: Error) -> CasStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, CasStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(CasStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        CasStatus::InvalidUtf8
    })
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, CasStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        CasStatus::NullPointer
    })
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), CasStatus> {
    if out.is_null() {
        set_error("null out-pointer");
        return Err(CasStatus::NullPointer);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), CasStatus> {
    if out.is_null() {
        set_error("null out-pointer");
        return Err(CasStatus::NullPointer);
    }
    let c = CString::new(s).map_err(|_| {
        set_error("output contains a nul byte");
        CasStatus::Internal
    })?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn weights_or_default<'a>(w: *const CasWeights) -> &'a WeightConfig {
    match w.as_ref() {
        Some(w) => &w.0,
        None => WeightConfig::default_config(),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn cas_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cas_weights_default(out: *mut *mut CasWeights) -> CasStatus {
    guard(|| put(out, CasWeights(WeightConfig::default_config().clone())))
}

/// Parses a weight configuration document. The result is not validated; see
/// `cas_weights_validate`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cas_weights_from_json(json: *const c_char, out: *mut *mut CasWeights) -> CasStatus {
    guard(|| {
        let text = str_arg(json)?;
        let w = WeightConfig::from_json(text).map_err(fail)?;
        put(out, CasWeights(w))
    })
}

/// Checks the configuration. Returns `CAS_STATUS_VALIDATION_ERROR` when it has
/// violations; if `report_json` is not null it receives the violation list.
///
/// # Safety
/// `weights` must be a live handle; `report_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn cas_weights_validate(weights: *const CasWeights, report_json: *mut *mut c_char) -> CasStatus {
    guard(|| {
        let w = ref_arg(weights)?;
        let report = w.0.validate();
        if !report_json.is_null() {
            let text = serde_json::to_string(&report).map_err(|e| fail(e.into()))?;
            put_string(report_json, text)?;
        }
        if report.is_ok() {
            Ok(())
        } else {
            set_error(report.to_string());
            Err(CasStatus::ValidationError)
        }
    })
}

/// # Safety
/// `weights` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cas_weights_free(weights: *mut CasWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Parses and checks an answer sheet.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cas_sheet_from_json(json: *const c_char, out: *mut *mut CasSheet) -> CasStatus {
    guard(|| {
        let sheet = AnswerSheet::from_json(str_arg(json)?).map_err(fail)?;
        if let Some(e) = sheet.validate().into_iter().next() {
            return Err(fail(e));
        }
        put(out, CasSheet(sheet))
    })
}

/// # Safety
/// `sheet` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cas_sheet_free(sheet: *mut CasSheet) {
    if !sheet.is_null() {
        drop(Box::from_raw(sheet));
    }
}

/// Composite score of a sheet. A null `weights` uses the default configuration.
///
/// # Safety
/// `sheet` must be a live handle, `weights` a live handle or null, `out_total` valid.
#[no_mangle]
pub unsafe extern "C" fn cas_score(sheet: *const CasSheet, weights: *const CasWeights, out_total: *mut c_double) -> CasStatus {
    guard(|| {
        let s = ref_arg(sheet)?;
        if out_total.is_null() {
            set_error("null out-pointer");
            return Err(CasStatus::NullPointer);
        }
        let scored = score_assessment(&s.0, weights_or_default(weights)).map_err(fail)?;
        *out_total = scored.cas.total;
        Ok(())
    })
}

/// Full scored assessment (per-property contributions, total, provenance) as JSON.
///
/// # Safety
/// As for `cas_score`; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cas_score_json(sheet: *const CasSheet, weights: *const CasWeights, out_json: *mut *mut c_char) -> CasStatus {
    guard(|| {
        let s = ref_arg(sheet)?;
        let scored = score_assessment(&s.0, weights_or_default(weights)).map_err(fail)?;
        let text = serde_json::to_string(&scored).map_err(|e| fail(e.into()))?;
        put_string(out_json, text)
    })
}

/// Renders a report; `format` is "markdown", "json" or "csv".
///
/// # Safety
/// As for `cas_score`; `format` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cas_report(
    sheet: *const CasSheet,
    weights: *const CasWeights,
    format: *const c_char,
    out: *mut *mut c_char,
) -> CasStatus {
    guard(|| {
        let s = ref_arg(sheet)?;
        let format: ReportFormat = str_arg(format)?.parse().map_err(fail)?;
        let scored = score_assessment(&s.0, weights_or_default(weights)).map_err(fail)?;
        let text = render_report(&ReportBundle::new(scored), format).map_err(fail)?;
        put_string(out, text)
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cas_ledger_from_json(json: *const c_char, out: *mut *mut CasLedger) -> CasStatus {
    guard(|| {
        let l = ContestationLedger::from_json(str_arg(json)?).map_err(fail)?;
        put(out, CasLedger(l))
    })
}

/// Evaluates the contestability predicates and the weighted aggregate.
/// `alpha + beta + gamma` must be 1. The JSON result reports an undefined
/// aggregate through its `aggregate_error` field rather than a failure status.
///
/// # Safety
/// `ledger` must be a live handle and `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cas_ledger_evaluate(
    ledger: *const CasLedger,
    alpha: c_double,
    beta: c_double,
    gamma: c_double,
    out_json: *mut *mut c_char,
) -> CasStatus {
    guard(|| {
        let l = ref_arg(ledger)?;
        let w = AggregateWeights::new(alpha, beta, gamma).map_err(fail)?;
        let eval = evaluate_ledger(&l.0, w).map_err(fail)?;
        let text = serde_json::to_string(&eval).map_err(|e| fail(e.into()))?;
        put_string(out_json, text)
    })
}

/// Aggregate value only. Fails with `CAS_STATUS_UNDEFINED_RATE` when some
/// stakeholder has no contestation attempts.
///
/// # Safety
/// `ledger` must be a live handle and `out_value` valid.
#[no_mangle]
pub unsafe extern "C" fn cas_ledger_aggregate(
    ledger: *const CasLedger,
    alpha: c_double,
    beta: c_double,
    gamma: c_double,
    out_value: *mut c_double,
) -> CasStatus {
    guard(|| {
        let l = ref_arg(ledger)?;
        if out_value.is_null() {
            set_error("null out-pointer");
            return Err(CasStatus::NullPointer);
        }
        let w = AggregateWeights::new(alpha, beta, gamma).map_err(fail)?;
        let a = cas_core::formal::aggregate_contest(&l.0, w).map_err(fail)?;
        *out_value = a.value;
        Ok(())
    })
}

/// # Safety
/// `ledger` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cas_ledger_free(ledger: *mut CasLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}
