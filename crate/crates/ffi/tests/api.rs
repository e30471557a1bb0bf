use std::ffi::{c_char, CStr, CString};
use std::ptr;

use geoshot_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let need = unsafe { gs_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(need >= 1);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn tfim() -> *mut GsModel {
    let json = cstr(r#"{"model": {"model": "tfim", "j": 1.0, "h": 1.0}, "lattice": {"nx": 4, "ny": 2}}"#);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gs_model_from_json(json.as_ptr(), &mut m) }, GsStatus::Ok);
    m
}

#[test]
fn round_trip_through_handles() {
    let m = tfim();
    assert_eq!(unsafe { gs_model_n_qubits(m) }, 8);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gs_ground_state(m, &mut s) }, GsStatus::Ok);
    let (mut e, mut gap, mut deg) = (0.0, 0.0, true);
    assert_eq!(unsafe { gs_state_info(s, &mut e, &mut gap, &mut deg) }, GsStatus::Ok);
    assert!(e < -8.0 && gap > 0.0 && !deg);

    let (pauli, geo) = (cstr("pauli"), cstr("geo1d:2"));
    let mut g = 0.0;
    assert_eq!(unsafe { gs_relative_complexity(m, s, pauli.as_ptr(), geo.as_ptr(), &mut g) }, GsStatus::Ok);
    let (mut cp, mut cg) = (0.0, 0.0);
    unsafe {
        assert_eq!(gs_partition_cost(m, s, pauli.as_ptr(), &mut cp), GsStatus::Ok);
        assert_eq!(gs_partition_cost(m, s, geo.as_ptr(), &mut cg), GsStatus::Ok);
    }
    assert!(g > 1.0);
    assert!((g - cp / cg).abs() < 1e-9 * g);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { gs_model_hamiltonian_text(m, &mut text) }, GsStatus::Ok);
    let body = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    assert_eq!(geoshot::pauli::PauliSum::from_text(&body, None).unwrap().n_qubits(), 8);
    unsafe {
        gs_string_free(text);
        gs_state_free(s);
        gs_model_free(m);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gs_model_from_json(ptr::null(), &mut m) }, GsStatus::NullPointer);
    assert!(m.is_null());
    let bad = cstr(r#"{"model": {"model": "tfim", "j": 1.0, "h": 1.0}, "lattice": {"nx": 4}}"#);
    assert_eq!(unsafe { gs_model_from_json(bad.as_ptr(), &mut m) }, GsStatus::Config);
    assert!(last_error().contains("ny"));

    let m = tfim();
    let mut s = ptr::null_mut();
    unsafe { gs_ground_state(m, &mut s) };
    let (pauli, odd) = (cstr("pauli"), cstr("geo1d:3"));
    let mut g = 0.0;
    let st = unsafe { gs_relative_complexity(m, s, pauli.as_ptr(), odd.as_ptr(), &mut g) };
    assert_eq!(st, GsStatus::Partition);
    assert!(last_error().contains("divisible"));
    let junk = cstr("geo9d");
    assert_eq!(unsafe { gs_partition_cost(m, s, junk.as_ptr(), &mut g) }, GsStatus::Config);
    assert_eq!(unsafe { gs_partition_cost(m, s, pauli.as_ptr(), ptr::null_mut()) }, GsStatus::NullPointer);
    assert_eq!(unsafe { gs_state_info(ptr::null(), &mut g, ptr::null_mut(), ptr::null_mut()) }, GsStatus::NullPointer);
    unsafe {
        gs_state_free(s);
        gs_model_free(m);
        gs_model_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_buffer_is_terminated() {
    let mut m = ptr::null_mut();
    unsafe { gs_model_from_json(ptr::null(), &mut m) };
    let mut buf = [1 as c_char; 4];
    let need = unsafe { gs_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(need > 4);
    assert_eq!(buf[3], 0);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(gs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
