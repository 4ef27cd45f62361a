//! Exercises the C ABI through its Rust symbols and checks the generated
//! header declares every exported function.

use std::ffi::{CStr, CString};
use std::ptr;

use evobench_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn last_error() -> String {
    CStr::from_ptr(evobench_last_error()).to_string_lossy().into_owned()
}

#[test]
fn parse_measure_transform_roundtrip() {
    unsafe {
        let mut unit = ptr::null_mut();
        let src = c("def f(x):\n    if x:\n        return 1\n    return 2\n");
        assert_eq!(evobench_unit_parse(c("u").as_ptr(), src.as_ptr(), &mut unit), EvobenchStatus::Ok);
        let mut profile = ptr::null_mut();
        assert_eq!(evobench_profile_shipped(&mut profile), EvobenchStatus::Ok);
        let mut before = EvobenchFitness::default();
        assert_eq!(evobench_measure(unit, profile, &mut before), EvobenchStatus::Ok);
        assert!(before.rc > 0.0 && before.rc <= 1.0 && before.rr > 0.0 && before.rr <= 1.0);

        let mut n = 0usize;
        assert_eq!(evobench_operator_locations(unit, c("S5").as_ptr(), &mut n), EvobenchStatus::Ok);
        assert!(n > 0);
        let mut t = ptr::null_mut();
        assert_eq!(evobench_apply_operator(unit, c("S5").as_ptr(), 0, 7, &mut t), EvobenchStatus::Ok);
        let mut after = EvobenchFitness::default();
        assert_eq!(evobench_measure(t, profile, &mut after), EvobenchStatus::Ok);
        assert!(after.rc > before.rc);

        let mut text = ptr::null_mut();
        assert_eq!(evobench_unit_source(t, &mut text), EvobenchStatus::Ok);
        let emitted = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(emitted.contains("if "));
        evobench_string_free(text);

        let mut json = ptr::null_mut();
        assert_eq!(evobench_measure_json(t, profile, &mut json), EvobenchStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert!(v["complexity"]["C1"].is_number());
        evobench_string_free(json);

        evobench_unit_free(t);
        evobench_unit_free(unit);
        evobench_profile_free(profile);
    }
}

#[test]
fn errors_are_reported_by_code_and_message() {
    unsafe {
        let mut unit = ptr::null_mut();
        let st = evobench_unit_parse(c("u").as_ptr(), c("def (:\n").as_ptr(), &mut unit);
        assert_eq!(st, EvobenchStatus::Syntax);
        assert!(unit.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            evobench_unit_parse(ptr::null(), c("x = 1\n").as_ptr(), &mut unit),
            EvobenchStatus::NullPointer
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            evobench_unit_parse(c("u").as_ptr(), bad.as_ptr().cast(), &mut unit),
            EvobenchStatus::InvalidUtf8
        );

        let mut profile = ptr::null_mut();
        assert_eq!(evobench_profile_from_json(c("{}").as_ptr(), &mut profile), EvobenchStatus::Profile);

        assert_eq!(evobench_unit_parse(c("u").as_ptr(), c("x = 1\n").as_ptr(), &mut unit), EvobenchStatus::Ok);
        assert_eq!(last_error(), "");
        let mut n = 0;
        assert_eq!(
            evobench_operator_locations(unit, c("Z9").as_ptr(), &mut n),
            EvobenchStatus::UnknownOperator
        );
        let mut t = ptr::null_mut();
        assert_eq!(
            evobench_apply_operator(unit, c("S1").as_ptr(), 99, 0, &mut t),
            EvobenchStatus::NotApplicable
        );
        evobench_unit_free(unit);
        evobench_unit_free(ptr::null_mut());
        evobench_string_free(ptr::null_mut());
        assert!(!CStr::from_ptr(evobench_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/evobench.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["EvobenchStatus", "EvobenchUnit", "EvobenchProfile", "EvobenchFitness"] {
        assert!(header.contains(ty), "{ty} missing from header");
    }
}
