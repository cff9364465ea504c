use std::ffi::{CStr, CString};
use std::ptr;

use chp_ffi::*;

const EX1: &str = include_str!("../../core/examples/ex1.json");

fn parse(doc: &str) -> *mut ChpInstance {
    let json = CString::new(doc).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { chp_instance_parse(json.as_ptr(), &mut inst) }, ChpStatus::Ok);
    inst
}

fn last_error() -> String {
    let p = chp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn prices_example_one() {
    let inst = parse(EX1);
    unsafe {
        assert_eq!(chp_instance_horizon(inst), 1);
        let mut rep = ptr::null_mut();
        assert_eq!(chp_price(inst, ChpMode::Exact as i32, false, 0.0, 0.0, &mut rep), ChpStatus::Ok);
        assert_eq!(chp_report_buses(rep), 1);
        assert_eq!(chp_report_units(rep), 2);
        let mut p = 0.0;
        assert_eq!(chp_report_price(rep, 0, 0, &mut p), ChpStatus::Ok);
        assert!((p - 12.0).abs() < 1e-4, "{p}");
        let mut u = 0.0;
        assert_eq!(chp_report_uplift(rep, 0, &mut u), ChpStatus::Ok);
        assert!((u - 1430.0).abs() < 1e-2, "{u}");
        let mut t = ChpTotals::default();
        assert_eq!(chp_report_totals(rep, &mut t), ChpStatus::Ok);
        assert!((t.total_uplift - 1430.0).abs() < 1e-2);
        assert!((t.v_d - 1850.0).abs() < 1e-4);

        let mut js = ptr::null_mut();
        assert_eq!(chp_report_json(rep, &mut js), ChpStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(js).to_str().unwrap()).unwrap();
        assert_eq!(v["scheme"], "CHP");
        chp_string_free(js);

        assert_eq!(chp_report_price(rep, 1, 0, &mut p), ChpStatus::OutOfRange);
        assert!(last_error().contains("period 1"));
        chp_report_free(rep);

        assert_eq!(chp_price(inst, ChpMode::Lmp as i32, false, 0.0, 0.0, &mut rep), ChpStatus::Ok);
        assert_eq!(chp_report_price(rep, 0, 0, &mut p), ChpStatus::Ok);
        assert!((p - 50.0).abs() < 1e-4, "{p}");
        chp_report_free(rep);
        chp_instance_free(inst);
    }
}

#[test]
fn reports_errors() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new("{\"horizon\": 1}").unwrap();
        assert_eq!(chp_instance_parse(bad.as_ptr(), &mut inst), ChpStatus::Schema);
        assert!(inst.is_null());
        assert!(!last_error().is_empty());

        let path = CString::new("/nonexistent/instance.json").unwrap();
        assert_eq!(chp_instance_load(path.as_ptr(), &mut inst), ChpStatus::Io);
        assert_eq!(chp_instance_load(ptr::null(), &mut inst), ChpStatus::NullArgument);

        let inst = parse(EX1);
        let mut rep = ptr::null_mut();
        assert_eq!(chp_price(inst, 99, false, 0.0, 0.0, &mut rep), ChpStatus::OutOfRange);
        assert!(last_error().contains("99"));
        assert_eq!(chp_price(ptr::null(), 0, false, 0.0, 0.0, &mut rep), ChpStatus::NullArgument);
        assert_eq!(chp_price(inst, 0, false, 0.0, 0.0, ptr::null_mut()), ChpStatus::NullArgument);
        chp_instance_free(inst);
        chp_instance_free(ptr::null_mut());
        chp_report_free(ptr::null_mut());
        chp_string_free(ptr::null_mut());
    }
}

#[test]
fn ramping_instance_rejects_exact_mode() {
    let inst = parse(include_str!("../../core/examples/ex2.json"));
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(chp_price(inst, ChpMode::Exact as i32, false, 0.0, 0.0, &mut rep), ChpStatus::Unsupported);
        chp_instance_free(inst);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/chp.h")).unwrap();
    for f in [
        "chp_last_error", "chp_instance_load", "chp_instance_parse", "chp_instance_free", "chp_instance_horizon",
        "chp_price", "chp_report_free", "chp_report_buses", "chp_report_units", "chp_report_price",
        "chp_report_uplift", "chp_report_totals", "chp_report_json", "chp_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("CHP_STATUS_OK = 0"));
}
