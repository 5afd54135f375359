use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use crowdcomp_ffi::*;

fn last_error() -> String {
    let p = cc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn linear_instance() -> *mut CcInstance {
    let mut inst = ptr::null_mut();
    let st = unsafe { cc_instance_generate(6, 4, 0.1, 0.5, 7, CcModel::Linear, 0, &mut inst) };
    assert_eq!(st, CcStatus::Ok);
    inst
}

#[test]
fn generate_solve_and_inspect() {
    let inst = linear_instance();
    let (mut nt, mut nd) = (0, 0);
    assert_eq!(unsafe { cc_instance_size(inst, &mut nt, &mut nd) }, CcStatus::Ok);
    assert_eq!((nt, nd), (6, 4));

    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { cc_solve_two_phase(inst, 1e-6, &mut plan) }, CcStatus::Ok);
    let (mut cost, mut dist, mut offers) = (0.0, 0.0, 0);
    assert_eq!(unsafe { cc_plan_summary(plan, &mut cost, &mut dist, &mut offers) }, CcStatus::Ok);
    assert!(offers <= 4);

    let mut paid = 0;
    for i in 0..6 {
        let (mut d, mut c) = (0i64, 0.0);
        assert_eq!(unsafe { cc_plan_allocation(plan, i, &mut d, &mut c) }, CcStatus::Ok);
        if d >= 0 {
            assert!(c > 0.0);
            paid += 1;
        }
    }
    assert_eq!(paid, offers);

    let (mut d, mut c) = (0i64, 0.0);
    assert_eq!(unsafe { cc_plan_allocation(plan, 6, &mut d, &mut c) }, CcStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));

    // Two-phase dominates every tuned benchmark.
    for scheme in [CcScheme::Detour, CcScheme::Distance, CcScheme::Flat] {
        let mut other = ptr::null_mut();
        let mut p = f64::NAN;
        assert_eq!(unsafe { cc_solve_scheme(inst, scheme, 1e-6, &mut other, &mut p) }, CcStatus::Ok);
        assert!(p >= 0.0);
        let (mut oc, mut od, mut oo) = (0.0, 0.0, 0);
        unsafe { cc_plan_summary(other, &mut oc, &mut od, &mut oo) };
        assert!(cost <= oc + 1e-9);
        unsafe { cc_plan_free(other) };
    }

    unsafe {
        cc_plan_free(plan);
        cc_instance_free(inst);
    }
}

#[test]
fn json_round_trip() {
    let inst = linear_instance();
    let mut text: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { cc_instance_to_json(inst, &mut text) }, CcStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { cc_instance_from_json(text, &mut again) }, CcStatus::Ok);
    let mut text2: *mut c_char = ptr::null_mut();
    unsafe { cc_instance_to_json(again, &mut text2) };
    assert_eq!(unsafe { CStr::from_ptr(text) }, unsafe { CStr::from_ptr(text2) });
    unsafe {
        cc_string_free(text);
        cc_string_free(text2);
        cc_instance_free(inst);
        cc_instance_free(again);
    }
}

#[test]
fn errors_are_reported() {
    let mut inst = ptr::null_mut();
    let bad = CString::new("{\"plane_size\": 200}").unwrap();
    assert_eq!(unsafe { cc_instance_from_json(bad.as_ptr(), &mut inst) }, CcStatus::Schema);
    assert!(inst.is_null());
    assert!(!last_error().is_empty());

    let missing = CString::new("/nonexistent/instance.json").unwrap();
    assert_eq!(unsafe { cc_instance_load(missing.as_ptr(), &mut inst) }, CcStatus::Io);
    assert!(last_error().contains("/nonexistent/instance.json"));

    assert_eq!(unsafe { cc_instance_load(ptr::null(), &mut inst) }, CcStatus::NullArgument);
    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { cc_solve_two_phase(ptr::null(), 1e-6, &mut plan) }, CcStatus::NullArgument);

    let st = unsafe { cc_instance_generate(3, 3, 0.9, 0.5, 1, CcModel::Linear, 0, &mut inst) };
    assert_eq!(st, CcStatus::InvalidArgument);
    assert!(last_error().contains("rho"));

    let mut w = 0.0;
    assert_eq!(unsafe { cc_lambert_w0(-1.0, &mut w) }, CcStatus::Solver);
    assert_eq!(unsafe { cc_lambert_w0(1.0, &mut w) }, CcStatus::Ok);
    assert!((w - 0.5671432904097838).abs() < 1e-15);
    assert!(cc_last_error().is_null());
}

#[test]
fn nonsep_cardinality_and_infeasibility() {
    let inst = linear_instance();
    let one_offer_at_most = |b: f64| {
        let row = vec![vec![1.0; 4]; 6];
        let zeros = vec![vec![0.0; 4]; 6];
        let s = constraint_json(&row, &zeros, b);
        CString::new(s).unwrap()
    };
    let mut plan = ptr::null_mut();
    let c = one_offer_at_most(1.0);
    assert_eq!(unsafe { cc_solve_nonsep(inst, c.as_ptr(), 5, 10_000, 1e-6, &mut plan) }, CcStatus::Ok);
    let (mut cost, mut dist, mut offers) = (0.0, 0.0, 0);
    unsafe { cc_plan_summary(plan, &mut cost, &mut dist, &mut offers) };
    assert!(offers <= 1);
    unsafe { cc_plan_free(plan) };

    let c = one_offer_at_most(-1.0);
    let mut plan = ptr::null_mut();
    assert_eq!(
        unsafe { cc_solve_nonsep(inst, c.as_ptr(), 5, 10_000, 1e-6, &mut plan) },
        CcStatus::Infeasible
    );
    unsafe { cc_instance_free(inst) };
}

fn constraint_json(a: &[Vec<f64>], b: &[Vec<f64>], limit: f64) -> String {
    let rows = |m: &[Vec<f64>]| {
        m.iter()
            .map(|r| format!("[{}]", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("[{{\"a\":[{}],\"b\":[{}],\"B\":{}}}]", rows(a), rows(b), limit)
}

#[test]
fn linear_compensation_matches_closed_form() {
    let (mut c, mut w) = (0.0, 0.0);
    let st = unsafe { cc_optimal_compensation_linear(0.2, 0.05, 20.0, 16.0, 1e-6, &mut c, &mut w) };
    assert_eq!(st, CcStatus::Ok);
    assert!((c - 8.0).abs() < 1e-12);
    assert!((w - 12.8).abs() < 1e-12);
    let st = unsafe { cc_optimal_compensation_linear(0.2, 0.0, 20.0, 16.0, 1e-6, &mut c, &mut w) };
    assert_eq!(st, CcStatus::InvalidArgument);
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/crowdcomp.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["cc_solve_two_phase", "cc_plan_free", "cc_last_error", "typedef struct CcInstance CcInstance"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
