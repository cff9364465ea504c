//! C interface to the pricing library.
//!
//! Instances and reports are opaque handles owned by the caller and released
//! with their `_free` functions. Every fallible call returns a [`ChpStatus`];
//! on failure [`chp_last_error`] describes the error of the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chp::conic::SolverSettings;
use chp::instance::{load_instance, parse_instance, Instance};
use chp::market::{chp_report, lmp, solve_uced, PriceReport, PricingMode, UcedOptions};
use chp::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Schema = 4,
    InvalidInstance = 5,
    Infeasible = 6,
    SolverFailure = 7,
    Unsupported = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Pricing schemes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChpMode {
    Exact = 0,
    Achp1 = 1,
    Extended = 2,
    SinglePeriod = 3,
    Lmp = 4,
}

/// A validated market instance.
pub struct ChpInstance(Instance);

/// A settled pricing report.
pub struct ChpReport(PriceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> ChpStatus {
    match e {
        Error::Io { .. } => ChpStatus::Io,
        Error::Schema { .. } => ChpStatus::Schema,
        Error::Invariant { .. } => ChpStatus::InvalidInstance,
        Error::Infeasible(_) => ChpStatus::Infeasible,
        Error::Solver { .. } | Error::Model(_) => ChpStatus::SolverFailure,
        Error::EnumerationCap(_) | Error::Unsupported(_) | Error::UnknownGroup(_) => ChpStatus::Unsupported,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ChpStatus>) -> ChpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ChpStatus::Panic
        }
    }
}

fn fail(e: Error) -> ChpStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, ChpStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(ChpStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        ChpStatus::InvalidUtf8
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, ChpStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output argument");
        ChpStatus::NullArgument
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, ChpStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        ChpStatus::NullArgument
    })
}

/// Message of the last error on this thread, or null. The string stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads an instance document from `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_instance_load(path: *const c_char, out: *mut *mut ChpInstance) -> ChpStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let inst = load_instance(Path::new(text(path)?)).map_err(fail)?;
        *out = Box::into_raw(Box::new(ChpInstance(inst)));
        Ok(())
    })
}

/// Parses an instance document from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_instance_parse(json: *const c_char, out: *mut *mut ChpInstance) -> ChpStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let inst = parse_instance(text(json)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(ChpInstance(inst)));
        Ok(())
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chp_instance_free(inst: *mut ChpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Periods of the instance.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chp_instance_horizon(inst: *const ChpInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.horizon)
}

impl ChpMode {
    fn from_raw(v: i32) -> Option<ChpMode> {
        [ChpMode::Exact, ChpMode::Achp1, ChpMode::Extended, ChpMode::SinglePeriod, ChpMode::Lmp]
            .into_iter()
            .find(|m| *m as i32 == v)
    }
}

/// Commits the instance and prices it under `mode`, a [`ChpMode`]. With `qualified`
/// nonzero, the hull model covers and pays the qualified units only.
/// `mipgap` and `tol` of zero or less select the defaults.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_price(
    inst: *const ChpInstance,
    mode: i32,
    qualified: bool,
    mipgap: f64,
    tol: f64,
    out: *mut *mut ChpReport,
) -> ChpStatus {
    guard(|| {
        let inst = &handle(inst)?.0;
        let out = out_ptr(out)?;
        let mode = ChpMode::from_raw(mode).ok_or_else(|| {
            set_error(format!("unknown pricing mode {mode}"));
            ChpStatus::OutOfRange
        })?;
        let s = if tol > 0.0 { SolverSettings::with_tol(tol) } else { SolverSettings::default() };
        let opts = UcedOptions { mipgap: if mipgap > 0.0 { mipgap } else { UcedOptions::default().mipgap }, ..Default::default() };
        let uc = solve_uced(inst, opts, &s).map_err(fail)?;
        let report = match mode {
            ChpMode::Lmp => lmp(inst, &uc.schedule, &s),
            ChpMode::Exact => chp_report(inst, PricingMode::Exact, qualified, &uc.schedule, &s),
            ChpMode::Achp1 => chp_report(inst, PricingMode::Achp1, qualified, &uc.schedule, &s),
            ChpMode::Extended => chp_report(inst, PricingMode::Extended, qualified, &uc.schedule, &s),
            ChpMode::SinglePeriod => chp_report(inst, PricingMode::SinglePeriod, false, &uc.schedule, &s),
        }
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(ChpReport(report)));
        Ok(())
    })
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chp_report_free(report: *mut ChpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of buses priced by the report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chp_report_buses(report: *const ChpReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.prices.first().map_or(0, Vec::len))
}

/// Number of units in the report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chp_report_units(report: *const ChpReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.per_unit.len())
}

/// Price at 0-based `period` and `bus`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_report_price(report: *const ChpReport, period: usize, bus: usize, out: *mut f64) -> ChpStatus {
    guard(|| {
        let r = &handle(report)?.0;
        let out = out_ptr(out)?;
        *out = *r.prices.get(period).and_then(|row| row.get(bus)).ok_or_else(|| {
            set_error(format!("no price at period {period}, bus {bus}"));
            ChpStatus::OutOfRange
        })?;
        Ok(())
    })
}

/// Uplift of the 0-based unit `unit`; zero for units not paid uplift.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_report_uplift(report: *const ChpReport, unit: usize, out: *mut f64) -> ChpStatus {
    guard(|| {
        let r = &handle(report)?.0;
        let out = out_ptr(out)?;
        let u = r.per_unit.get(unit).ok_or_else(|| {
            set_error(format!("no unit {unit}"));
            ChpStatus::OutOfRange
        })?;
        *out = u.uplift.unwrap_or(0.0);
        Ok(())
    })
}

/// Report totals.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ChpTotals {
    pub total_uplift: f64,
    pub v_d: f64,
    pub dual_obj: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
}

/// Totals of the report.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_report_totals(report: *const ChpReport, out: *mut ChpTotals) -> ChpStatus {
    guard(|| {
        let t = &handle(report)?.0.totals;
        *out_ptr(out)? = ChpTotals {
            total_uplift: t.total_uplift,
            v_d: t.v_d,
            dual_obj: t.dual_obj,
            gap_abs: t.gap_abs,
            gap_rel: t.gap_rel,
        };
        Ok(())
    })
}

/// The report as a JSON document, to be released with [`chp_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chp_report_json(report: *const ChpReport, out: *mut *mut c_char) -> ChpStatus {
    guard(|| {
        let r = &handle(report)?.0;
        let out = out_ptr(out)?;
        let json = serde_json::to_string(r).map_err(|e| {
            set_error(e.to_string());
            ChpStatus::SolverFailure
        })?;
        *out = CString::new(json).expect("json has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
