use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use toledo::cli::RepresentationFile;
use toledo::constructors;
use toledo_ffi::*;

fn pants_json(n: usize) -> CString {
    let rep = constructors::pants_model(n).unwrap();
    CString::new(serde_json::to_string(&RepresentationFile::from_representation(&rep)).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = toledo_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn toledo_of_model_through_handles() {
    let json = pants_json(2);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { toledo_representation_from_json(json.as_ptr(), &mut rep) }, ToledoStatus::Ok);
    assert_eq!(unsafe { toledo_representation_rank(rep) }, 2);
    let mut t = f64::NAN;
    assert_eq!(unsafe { toledo_invariant(rep, 2, 20, &mut t) }, ToledoStatus::Ok);
    assert!((t - 2.0).abs() < 1e-6, "{t}");
    assert_eq!(unsafe { toledo_invariant(rep, 0, 20, &mut t) }, ToledoStatus::InvalidInput);
    assert!(last_error().contains("weight"));
    unsafe { toledo_representation_free(rep) };
}

#[test]
fn bad_json_reports_position() {
    let json = CString::new("{\"n\": 1,\n \"surface\": }").unwrap();
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { toledo_representation_from_json(json.as_ptr(), &mut rep) }, ToledoStatus::InvalidInput);
    assert!(rep.is_null());
    assert!(last_error().contains("line 2"));
}

#[test]
fn null_arguments() {
    let mut out = 0.0;
    assert_eq!(unsafe { toledo_invariant(ptr::null(), 2, 20, &mut out) }, ToledoStatus::NullPointer);
    assert_eq!(unsafe { toledo_rot(ptr::null(), 1, 2, &mut out) }, ToledoStatus::NullPointer);
    assert_eq!(unsafe { toledo_representation_rank(ptr::null()) }, 0);
    unsafe { toledo_representation_free(ptr::null_mut()) };
}

#[test]
fn rot_and_maslov() {
    let (c, s) = (60f64.to_radians().cos(), 60f64.to_radians().sin());
    let m = [c, -s, s, c];
    let mut r = 0.0;
    assert_eq!(unsafe { toledo_rot(m.as_ptr(), 1, 2, &mut r) }, ToledoStatus::Ok);
    assert!((r - 1.0 / 3.0).abs() < 1e-9);
    let shear = [1.0, 1.0, 1.0, 1.0];
    assert_eq!(unsafe { toledo_rot(shear.as_ptr(), 1, 2, &mut r) }, ToledoStatus::InvalidInput);

    let (l1, l2, l3) = ([1.0, 0.0], [0.0, 1.0], [1.0, -1.0]);
    let mut tb = 0i64;
    assert_eq!(unsafe { toledo_maslov(l1.as_ptr(), l2.as_ptr(), l3.as_ptr(), 1, &mut tb) }, ToledoStatus::Ok);
    assert_eq!(tb, 1);
    assert_eq!(unsafe { toledo_maslov(l2.as_ptr(), l1.as_ptr(), l3.as_ptr(), 1, &mut tb) }, ToledoStatus::Ok);
    assert_eq!(tb, -1);
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/toledo.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["toledo_representation_from_json", "toledo_invariant", "toledo_last_error", "TOLEDO_STATUS_OK"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
